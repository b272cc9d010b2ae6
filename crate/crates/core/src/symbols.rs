//! Symbols on `𝕋 × ℤ` (and `ℤ × 𝕋`), their difference calculus, and numerical
//! membership diagnostics for the classes `S^m_{ρ,Λ}` and `M^m_{ρ,Λ}`.
//!
//! A [`Symbol`] is evaluated one *column* at a time: for a fixed discrete
//! variable `k` it returns the samples `σ(x_j, k)` on the `M`-point grid.
//! x-derivatives are spectral, so derived symbols are exact for band-limited
//! columns resolved at the requested `M`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::difference::binomial;
use crate::error::{Error, Result};
use crate::fourier::{derivative_samples, grid_point, multiply_coefficients};
use crate::weights::WeightFunction;

/// Consecutive-window growth ratio above which a seminorm counts as unbounded.
pub const GROWTH_TOLERANCE: f64 = 0.1;
/// Seminorms below this floor are treated as zero when testing growth.
pub const SEMINORM_FLOOR: f64 = 1e-8;

/// Which variable is discrete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `σ(x, k)` on `𝕋 × ℤ`.
    Torus,
    /// `σ(n, x)` on `ℤ × 𝕋`.
    Lattice,
}

/// Declared order `m`, type `ρ` and weight `Λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolClass {
    pub order: f64,
    pub rho: f64,
    pub weight: WeightFunction,
}

impl SymbolClass {
    pub fn new(order: f64, rho: f64, weight: WeightFunction) -> Self {
        Self { order, rho, weight }
    }

    /// Checks `ρ ∈ (0, 1/μ]` and the weight's growth bounds.
    pub fn validate(&self) -> Result<()> {
        let mu = self.weight.mu();
        let rho_max = if mu > 0.0 { 1.0 / mu } else { f64::INFINITY };
        if !(self.rho > 0.0 && self.rho <= rho_max * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!(
                "rho = {} must lie in (0, 1/mu] = (0, {rho_max}]",
                self.rho
            )));
        }
        if !self.order.is_finite() {
            return Err(Error::Precondition("order must be finite".into()));
        }
        self.weight.validate()
    }

    fn with_order(&self, order: f64) -> Self {
        Self {
            order,
            ..self.clone()
        }
    }
}

type ColumnFn = dyn Fn(i64, usize) -> Vec<Complex64> + Send + Sync;

/// A symbol with its declared class.
#[derive(Clone)]
pub struct Symbol {
    column: Arc<ColumnFn>,
    class: SymbolClass,
    side: Side,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("side", &self.side)
            .field("class", &self.class)
            .finish_non_exhaustive()
    }
}

impl Symbol {
    /// Torus symbol from a closed form `σ(x, k)`.
    pub fn torus(
        class: SymbolClass,
        f: impl Fn(f64, i64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        class.validate()?;
        Ok(Self::derived(class, Side::Torus, move |k, m| {
            (0..m).map(|j| f(grid_point(j, m), k)).collect()
        }))
    }

    /// Lattice symbol from a closed form `σ(n, x)`.
    pub fn lattice(
        class: SymbolClass,
        f: impl Fn(i64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        class.validate()?;
        Ok(Self::derived(class, Side::Lattice, move |n, m| {
            (0..m).map(|j| f(n, grid_point(j, m))).collect()
        }))
    }

    /// Symbol given directly by its columns.
    pub fn from_columns(
        class: SymbolClass,
        side: Side,
        f: impl Fn(i64, usize) -> Vec<Complex64> + Send + Sync + 'static,
    ) -> Result<Self> {
        class.validate()?;
        Ok(Self::derived(class, side, f))
    }

    /// x-independent torus symbol `σ(k)`.
    pub fn multiplier(
        class: SymbolClass,
        f: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        class.validate()?;
        Ok(Self::derived(class, Side::Torus, move |k, m| vec![f(k); m]))
    }

    pub(crate) fn derived(
        class: SymbolClass,
        side: Side,
        f: impl Fn(i64, usize) -> Vec<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            column: Arc::new(f),
            class,
            side,
        }
    }

    /// Samples of the symbol at discrete variable `k` on the `m`-point grid.
    pub fn column(&self, k: i64, m: usize) -> Vec<Complex64> {
        (self.column)(k, m)
    }

    /// `σ(x_j, k)` with `x_j = 2πj/m`.
    pub fn eval_on_grid(&self, j: usize, k: i64, m: usize) -> Complex64 {
        self.column(k, m)[j]
    }

    pub fn class(&self) -> &SymbolClass {
        &self.class
    }

    pub fn order(&self) -> f64 {
        self.class.order
    }

    pub fn rho(&self) -> f64 {
        self.class.rho
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.class.weight
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Same function, re-declared at `order`.
    pub fn with_order(&self, order: f64) -> Symbol {
        Symbol {
            class: self.class.with_order(order),
            ..self.clone()
        }
    }

    /// `Δ_k^α σ`, declared order `m - ρα`.
    pub fn forward_difference(&self, alpha: u32) -> Symbol {
        if alpha == 0 {
            return self.clone();
        }
        let inner = self.clone();
        let class = self.class.with_order(self.order() - self.rho() * alpha as f64);
        Symbol::derived(class, self.side, move |k, m| {
            combine(
                (0..=alpha).map(|j| {
                    let sign = if (alpha - j) % 2 == 0 { 1.0 } else { -1.0 };
                    (sign * binomial(alpha, j), k + j as i64)
                }),
                &inner,
                m,
            )
        })
    }

    /// `Δ̄_k^α σ`, declared order `m - ρα`.
    pub fn backward_difference(&self, alpha: u32) -> Symbol {
        if alpha == 0 {
            return self.clone();
        }
        let inner = self.clone();
        let class = self.class.with_order(self.order() - self.rho() * alpha as f64);
        Symbol::derived(class, self.side, move |k, m| {
            combine(
                (0..=alpha).map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    (sign * binomial(alpha, j), k - j as i64)
                }),
                &inner,
                m,
            )
        })
    }

    /// `∂_x^β σ` (spectral).
    pub fn x_derivative(&self, beta: u32) -> Symbol {
        if beta == 0 {
            return self.clone();
        }
        let inner = self.clone();
        Symbol::derived(self.class.clone(), self.side, move |k, m| {
            derivative_samples(&inner.column(k, m), beta)
        })
    }

    /// Multiplies the x-Fourier coefficient at frequency `j` by `mult(j)`.
    pub fn x_fourier_multiplier(
        &self,
        mult: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
    ) -> Symbol {
        let inner = self.clone();
        Symbol::derived(self.class.clone(), self.side, move |k, m| {
            let col = inner.column(k, m);
            if col.iter().all(|c| *c == col[0]) {
                let c0 = mult(0);
                return col.into_iter().map(|c| c * c0).collect();
            }
            multiply_coefficients(&col, &mult)
        })
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Symbol {
        let inner = self.clone();
        Symbol::derived(self.class.clone(), self.side, move |k, m| {
            inner.column(k, m).into_iter().map(|c| c.conj()).collect()
        })
    }

    pub fn scale(&self, factor: Complex64) -> Symbol {
        let inner = self.clone();
        Symbol::derived(self.class.clone(), self.side, move |k, m| {
            inner.column(k, m).into_iter().map(|c| c * factor).collect()
        })
    }

    /// Pointwise product, declared order `m + m'`.
    pub fn mul(&self, other: &Symbol) -> Symbol {
        let (a, b) = (self.clone(), other.clone());
        let class = SymbolClass {
            order: self.order() + other.order(),
            rho: self.rho().min(other.rho()),
            weight: self.weight().clone(),
        };
        Symbol::derived(class, self.side, move |k, m| {
            a.column(k, m)
                .into_iter()
                .zip(b.column(k, m))
                .map(|(p, q)| p * q)
                .collect()
        })
    }

    /// Pointwise sum, declared order `max(m, m')`.
    pub fn add(&self, other: &Symbol) -> Symbol {
        let (a, b) = (self.clone(), other.clone());
        let class = SymbolClass {
            order: self.order().max(other.order()),
            rho: self.rho().min(other.rho()),
            weight: self.weight().clone(),
        };
        Symbol::derived(class, self.side, move |k, m| {
            a.column(k, m)
                .into_iter()
                .zip(b.column(k, m))
                .map(|(p, q)| p + q)
                .collect()
        })
    }

    pub fn sub(&self, other: &Symbol) -> Symbol {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Multiplies by a function of the discrete variable only; keeps the declared order.
    pub fn mul_by_k_fn(&self, g: impl Fn(i64) -> f64 + Send + Sync + 'static) -> Symbol {
        let inner = self.clone();
        Symbol::derived(self.class.clone(), self.side, move |k, m| {
            let w = g(k);
            if w == 0.0 {
                return vec![Complex64::new(0.0, 0.0); m];
            }
            inner.column(k, m).into_iter().map(|c| c * w).collect()
        })
    }

    /// `k · Δ_k σ`, the γ = 1 companion in the definition of `M^m_{ρ,Λ}`.
    pub fn k_times_difference(&self) -> Symbol {
        self.forward_difference(1)
            .mul_by_k_fn(|k| k as f64)
            .with_order(self.order())
    }

    /// Reflected conjugate `(x, k) ↦ conj σ(-k, x)`; maps lattice symbols to torus
    /// symbols and back.
    pub fn dual(&self) -> Symbol {
        let inner = self.clone();
        let side = match self.side {
            Side::Torus => Side::Lattice,
            Side::Lattice => Side::Torus,
        };
        Symbol::derived(self.class.clone(), side, move |k, m| {
            inner.column(-k, m).into_iter().map(|c| c.conj()).collect()
        })
    }

    /// Tabulates columns `lo..=hi` at resolution `m`.
    pub fn tabulate(&self, lo: i64, hi: i64, m: usize) -> SymbolTable {
        SymbolTable {
            lo,
            hi,
            m,
            data: (lo..=hi).map(|k| self.column(k, m)).collect(),
        }
    }

    /// Largest deviation of any column from its mean over `|k| ≤ window`.
    pub fn x_variation(&self, window: i64, m: usize) -> f64 {
        (-window..=window)
            .map(|k| {
                let col = self.column(k, m);
                let mean = col.iter().sum::<Complex64>() / m as f64;
                col.iter().map(|c| (c - mean).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn combine(
    terms: impl Iterator<Item = (f64, i64)>,
    inner: &Symbol,
    m: usize,
) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); m];
    for (w, k) in terms {
        for (a, c) in acc.iter_mut().zip(inner.column(k, m)) {
            *a += c * w;
        }
    }
    acc
}

/// A symbol tabulated on the window `lo ≤ k ≤ hi` at resolution `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    lo: i64,
    hi: i64,
    m: usize,
    data: Vec<Vec<Complex64>>,
}

impl SymbolTable {
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn column(&self, k: i64) -> Result<&[Complex64]> {
        if k < self.lo || k > self.hi {
            return Err(Error::OutOfWindow {
                k,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(&self.data[(k - self.lo) as usize])
    }

    pub fn get(&self, j: usize, k: i64) -> Result<Complex64> {
        Ok(self.column(k)?[j])
    }

    fn shrink(&self, lo: i64, hi: i64, f: impl Fn(i64) -> Vec<Complex64>) -> Result<Self> {
        if lo > hi {
            return Err(Error::OutOfWindow {
                k: lo,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(SymbolTable {
            lo,
            hi,
            m: self.m,
            data: (lo..=hi).map(f).collect(),
        })
    }

    /// `Δ^α` on the table; the window shrinks to `[lo, hi - α]`.
    pub fn forward_difference(&self, alpha: u32) -> Result<Self> {
        let a = alpha as i64;
        self.shrink(self.lo, self.hi - a, |k| {
            let mut acc = vec![Complex64::new(0.0, 0.0); self.m];
            for j in 0..=alpha {
                let sign = if (alpha - j) % 2 == 0 { 1.0 } else { -1.0 };
                let w = sign * binomial(alpha, j);
                for (s, c) in acc.iter_mut().zip(&self.data[(k + j as i64 - self.lo) as usize]) {
                    *s += c * w;
                }
            }
            acc
        })
    }

    /// `Δ̄^α` on the table; the window shrinks to `[lo + α, hi]`.
    pub fn backward_difference(&self, alpha: u32) -> Result<Self> {
        let a = alpha as i64;
        self.shrink(self.lo + a, self.hi, |k| {
            let mut acc = vec![Complex64::new(0.0, 0.0); self.m];
            for j in 0..=alpha {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 } * binomial(alpha, j);
                for (s, c) in acc.iter_mut().zip(&self.data[(k - j as i64 - self.lo) as usize]) {
                    *s += c * w;
                }
            }
            acc
        })
    }

    /// Pointwise product of two tables on their common window.
    pub fn mul(&self, other: &SymbolTable) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                actual: other.m,
            });
        }
        let (lo, hi) = (self.lo.max(other.lo), self.hi.min(other.hi));
        self.shrink(lo, hi, |k| {
            self.data[(k - self.lo) as usize]
                .iter()
                .zip(&other.data[(k - other.lo) as usize])
                .map(|(a, b)| a * b)
                .collect()
        })
    }
}

/// Empirical constant for one `(α, β)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeminormEntry {
    pub alpha: u32,
    pub beta: u32,
    pub value: f64,
    pub argmax_k: i64,
}

/// Empirical seminorm constants `C_{α,β}` measured on `|k| ≤ window`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormTable {
    pub window: i64,
    pub order: f64,
    pub entries: Vec<SeminormEntry>,
}

impl SeminormTable {
    pub fn get(&self, alpha: u32, beta: u32) -> Option<SeminormEntry> {
        self.entries
            .iter()
            .find(|e| e.alpha == alpha && e.beta == beta)
            .copied()
    }
}

/// `sup_{x_j, |k| ≤ window} |Δ^α ∂_x^β σ(x_j, k)| / Λ(k)^{m - ρα}`.
pub fn seminorm_estimate(
    s: &Symbol,
    alpha: u32,
    beta: u32,
    window: i64,
    m: usize,
) -> Result<SeminormEntry> {
    let t = seminorm_table(s, alpha, beta, window, m)?;
    Ok(t.get(alpha, beta).expect("entry computed"))
}

/// All seminorms with `α ≤ alpha_max`, `β ≤ beta_max` on one window.
pub fn seminorm_table(
    s: &Symbol,
    alpha_max: u32,
    beta_max: u32,
    window: i64,
    m: usize,
) -> Result<SeminormTable> {
    if m < 2 * beta_max as usize + 2 {
        return Err(Error::Aliasing {
            grid: m,
            required: 2 * beta_max as usize + 2,
        });
    }
    let s = if s.side() == Side::Lattice { s.dual() } else { s.clone() };
    let base = s.tabulate(-window, window + alpha_max as i64, m);
    let mut entries = Vec::new();
    for beta in 0..=beta_max {
        let deriv = SymbolTable {
            data: base.data.iter().map(|c| derivative_samples(c, beta)).collect(),
            ..base.clone()
        };
        for alpha in 0..=alpha_max {
            let diff = deriv.forward_difference(alpha)?;
            let expo = s.order() - s.rho() * alpha as f64;
            let mut value = 0.0f64;
            let mut argmax_k = 0;
            for k in -window..=window {
                let scale = s.weight().pow(k, expo);
                let peak = diff.column(k)?.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let r = peak / scale;
                if r > value {
                    value = r;
                    argmax_k = k;
                }
            }
            entries.push(SeminormEntry {
                alpha,
                beta,
                value,
                argmax_k,
            });
        }
    }
    Ok(SeminormTable {
        window,
        order: s.order(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

/// A seminorm that keeps growing across the doubling windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Offense {
    pub gamma: u32,
    pub alpha: u32,
    pub beta: u32,
    pub k: i64,
    pub growth_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub order: f64,
    pub rho: f64,
    pub tables: Vec<SeminormTable>,
    pub offenses: Vec<Offense>,
    pub verdict: Verdict,
}

/// Seminorms over doubling windows; consistent with `S^m_{ρ,Λ}` when no seminorm
/// grows by more than [`GROWTH_TOLERANCE`] between the last two windows.
pub fn check_s_membership(
    s: &Symbol,
    alpha_max: u32,
    beta_max: u32,
    windows: &[i64],
    m: usize,
) -> Result<MembershipReport> {
    membership(s, 0, alpha_max, beta_max, windows, m)
}

fn membership(
    s: &Symbol,
    gamma: u32,
    alpha_max: u32,
    beta_max: u32,
    windows: &[i64],
    m: usize,
) -> Result<MembershipReport> {
    if windows.len() < 2 {
        return Err(Error::Precondition("need at least two windows".into()));
    }
    let tables = windows
        .iter()
        .map(|w| seminorm_table(s, alpha_max, beta_max, *w, m))
        .collect::<Result<Vec<_>>>()?;
    let (prev, last) = (&tables[tables.len() - 2], &tables[tables.len() - 1]);
    let scale = last
        .entries
        .iter()
        .map(|e| e.value)
        .fold(1.0f64, f64::max);
    let floor = SEMINORM_FLOOR * scale;
    let offenses: Vec<Offense> = last
        .entries
        .iter()
        .zip(&prev.entries)
        .filter(|(l, p)| l.value > p.value * (1.0 + GROWTH_TOLERANCE) + floor)
        .map(|(l, p)| Offense {
            gamma,
            alpha: l.alpha,
            beta: l.beta,
            k: l.argmax_k,
            growth_ratio: if p.value > 0.0 { l.value / p.value } else { f64::INFINITY },
        })
        .collect();
    Ok(MembershipReport {
        order: s.order(),
        rho: s.rho(),
        verdict: if offenses.is_empty() {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
        tables,
        offenses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MClassReport {
    /// Seminorms of `σ`.
    pub symbol: MembershipReport,
    /// Seminorms of `k · Δσ` at the same order.
    pub k_difference: MembershipReport,
    pub verdict: Verdict,
}

/// `σ` and `k·Δσ` both checked against `S^m_{ρ,Λ}`.
pub fn check_m_membership(
    s: &Symbol,
    alpha_max: u32,
    beta_max: u32,
    windows: &[i64],
    m: usize,
) -> Result<MClassReport> {
    let base = if s.side() == Side::Lattice { s.dual() } else { s.clone() };
    let symbol = membership(&base, 0, alpha_max, beta_max, windows, m)?;
    let k_difference = membership(&base.k_times_difference(), 1, alpha_max, beta_max, windows, m)?;
    let verdict = if symbol.verdict == Verdict::Consistent
        && k_difference.verdict == Verdict::Consistent
    {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(MClassReport {
        symbol,
        k_difference,
        verdict,
    })
}

/// Smooth monotone step: 0 for `t ≤ lo`, 1 for `t ≥ hi`, `C^∞` in between.
pub fn smooth_step(lo: f64, hi: f64, t: f64) -> f64 {
    if t <= lo {
        return 0.0;
    }
    if t >= hi {
        return 1.0;
    }
    let u = (t - lo) / (hi - lo);
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// `ψ(εt)` where `ψ = 0` on `|t| ≤ 1/2` and `ψ = 1` on `|t| ≥ 1`.
pub fn cutoff_psi(t: f64, eps: f64) -> f64 {
    assert!(eps > 0.0, "cutoff scale must be positive");
    smooth_step(0.5, 1.0, (eps * t).abs())
}

/// How the cutoff scales `ε_j` of an asymptotic sum are picked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    /// `ε_j = 2^{-j} ε₀`.
    Geometric { eps0: f64 },
    /// Geometric with the largest dyadic `ε₀ ≤ 1` for which every term's
    /// contribution `sup |ψ(ε_j k) σ_j| / Λ^{m₀}` is at most `2^{-j}`.
    Auto,
}

/// `σ = Σ_j ψ(ε_j k) σ_j` together with the scales used.
#[derive(Debug, Clone)]
pub struct AsymptoticSum {
    pub symbol: Symbol,
    pub eps: Vec<f64>,
}

impl AsymptoticSum {
    /// Indices of the terms whose cutoff is nonzero at `k`.
    pub fn active_terms(&self, k: i64) -> Vec<usize> {
        self.eps
            .iter()
            .enumerate()
            .filter(|(_, e)| cutoff_psi(k as f64, **e) > 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

const AUTO_SCAN: i64 = 256;
const AUTO_RESOLUTION: usize = 32;

/// Asymptotic sum of symbols with strictly decreasing orders.
pub fn asymptotic_sum(terms: Vec<Symbol>, rule: EpsRule) -> Result<AsymptoticSum> {
    if terms.is_empty() {
        return Err(Error::Precondition("asymptotic sum of no terms".into()));
    }
    if terms.windows(2).any(|w| w[1].order() >= w[0].order()) {
        return Err(Error::Precondition("orders must be strictly decreasing".into()));
    }
    for (j, t) in terms.iter().enumerate() {
        let rep = check_m_membership(t, 2, 1, &[16, 32, 64], AUTO_RESOLUTION)?;
        if rep.verdict != Verdict::Consistent {
            return Err(Error::Precondition(format!(
                "term {j} is not consistent with M^{}",
                t.order()
            )));
        }
    }
    let eps0 = match rule {
        EpsRule::Geometric { eps0 } => {
            if eps0 <= 0.0 {
                return Err(Error::Precondition("eps0 must be positive".into()));
            }
            eps0
        }
        EpsRule::Auto => auto_eps0(&terms),
    };
    let eps: Vec<f64> = (0..terms.len()).map(|j| eps0 * 0.5f64.powi(j as i32)).collect();
    let m0 = terms[0].order();
    let class = terms[0].class().with_order(m0);
    let side = terms[0].side();
    let (terms_c, eps_c) = (terms.clone(), eps.clone());
    let symbol = Symbol::derived(class, side, move |k, m| {
        let mut acc = vec![Complex64::new(0.0, 0.0); m];
        for (t, e) in terms_c.iter().zip(&eps_c) {
            let w = cutoff_psi(k as f64, *e);
            if w == 0.0 {
                continue;
            }
            for (a, c) in acc.iter_mut().zip(t.column(k, m)) {
                *a += c * w;
            }
        }
        acc
    });
    Ok(AsymptoticSum { symbol, eps })
}

fn auto_eps0(terms: &[Symbol]) -> f64 {
    let m0 = terms[0].order();
    let ok = |eps0: f64| {
        terms.iter().enumerate().skip(1).all(|(j, t)| {
            let eps = eps0 * 0.5f64.powi(j as i32);
            let start = (0.5 / eps).floor() as i64;
            (start..=start + AUTO_SCAN).all(|k| {
                let w = cutoff_psi(k as f64, eps);
                let peak = t
                    .column(k, AUTO_RESOLUTION)
                    .iter()
                    .map(|c| c.norm())
                    .fold(0.0, f64::max);
                w * peak / t.weight().pow(k, m0) <= 0.5f64.powi(j as i32)
            })
        })
    };
    (0..=20)
        .map(|i| 0.5f64.powi(i))
        .find(|e| ok(*e))
        .unwrap_or(0.5f64.powi(20))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn jap(order: f64) -> SymbolClass {
        SymbolClass::new(order, 1.0, WeightFunction::japanese())
    }

    #[test]
    fn rho_outside_range_is_rejected() {
        let class = SymbolClass::new(0.0, 1.5, WeightFunction::japanese());
        assert!(Symbol::multiplier(class, |_| c(1.0)).is_err());
        let class = SymbolClass::new(0.0, 0.0, WeightFunction::japanese());
        assert!(Symbol::multiplier(class, |_| c(1.0)).is_err());
    }

    #[test]
    fn differences_of_polynomials() {
        let sq = Symbol::multiplier(jap(2.0), |k| c((k * k) as f64)).unwrap();
        let d1 = sq.forward_difference(1);
        let d2 = sq.forward_difference(2);
        for k in -5..5 {
            assert_eq!(d1.column(k, 4)[0], c((2 * k + 1) as f64));
            assert_eq!(d2.column(k, 4)[3], c(2.0));
        }
        let id = Symbol::multiplier(jap(1.0), |k| c(k as f64)).unwrap();
        assert_eq!(id.backward_difference(1).column(7, 2)[1], c(1.0));
        let constant = Symbol::multiplier(jap(0.0), |_| c(3.5)).unwrap();
        assert_eq!(constant.forward_difference(3).column(2, 2)[0], c(0.0));
        assert_eq!(constant.backward_difference(2).column(2, 2)[0], c(0.0));
    }

    #[test]
    fn table_window_shrinks_and_errors() {
        let s = Symbol::multiplier(jap(3.0), |k| c((k * k * k) as f64)).unwrap();
        let t = s.tabulate(-4, 4, 3);
        let d = t.forward_difference(2).unwrap();
        assert_eq!(d.window(), (-4, 2));
        assert!(matches!(d.column(3), Err(Error::OutOfWindow { k: 3, .. })));
        assert!(t.forward_difference(9).is_err());
        // Δ̄Δ = ΔΔ̄ on the interior.
        let db = t.forward_difference(1).unwrap().backward_difference(1).unwrap();
        let bd = t.backward_difference(1).unwrap().forward_difference(1).unwrap();
        for k in -3..=3 {
            assert_eq!(db.column(k).unwrap(), bd.column(k).unwrap());
        }
    }

    #[test]
    fn leibniz_rule_on_tables() {
        let f = Symbol::torus(jap(1.0), |x, k| c((2.0 + x.sin()) * k as f64)).unwrap();
        let g = Symbol::torus(jap(0.0), |x, k| Complex64::new(x.cos(), (k * k) as f64)).unwrap();
        let (tf, tg) = (f.tabulate(-10, 10, 8), g.tabulate(-10, 10, 8));
        let lhs = tf.mul(&tg).unwrap().forward_difference(1).unwrap();
        let dg = tg.forward_difference(1).unwrap();
        let df = tf.forward_difference(1).unwrap();
        for k in -10..10 {
            for j in 0..8 {
                let rhs = tf.get(j, k + 1).unwrap() * dg.get(j, k).unwrap()
                    + df.get(j, k).unwrap() * tg.get(j, k).unwrap();
                assert!((lhs.get(j, k).unwrap() - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn seminorm_examples() {
        let w = WeightFunction::japanese();
        let s = Symbol::multiplier(jap(1.5), move |k| c(w.pow(k, 1.5))).unwrap();
        assert_eq!(seminorm_estimate(&s, 0, 1, 32, 16).unwrap().value, 0.0);
        assert_eq!(seminorm_estimate(&s, 1, 2, 32, 16).unwrap().value, 0.0);

        let e = Symbol::torus(jap(0.0), |x, _| Complex64::from_polar(1.0, x)).unwrap();
        let v = seminorm_estimate(&e, 0, 2, 16, 16).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
        assert!(matches!(
            seminorm_estimate(&e, 0, 4, 16, 8),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn seminorm_matches_direct_scan() {
        // Independent scan: |<k+1>(2+sin x) - <k>(2+sin x)| / <k>^0 maximized at sin x = 1.
        let w = WeightFunction::japanese();
        let s = Symbol::torus(jap(1.0), move |x, k| c(w.eval(k) * (2.0 + x.sin()))).unwrap();
        let est = seminorm_estimate(&s, 1, 0, 128, 16).unwrap();
        let w = WeightFunction::japanese();
        let scan = (-128..=128)
            .map(|k: i64| 3.0 * (w.eval(k + 1) - w.eval(k)).abs())
            .fold(0.0, f64::max);
        assert!((est.value - scan).abs() < 1e-12);
    }

    #[test]
    fn membership_verdicts() {
        let w = WeightFunction::japanese();
        let ok = Symbol::multiplier(jap(2.0), move |k| c(w.pow(k, 2.0))).unwrap();
        let r = check_m_membership(&ok, 2, 1, &[32, 64, 128], 16).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);

        let wrong = Symbol::multiplier(jap(0.0), |k| c(k as f64)).unwrap();
        let r = check_s_membership(&wrong, 2, 1, &[32, 64, 128], 16).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent);
        let o = r.offenses.iter().find(|o| o.alpha == 0).unwrap();
        assert!((o.growth_ratio - 2.0).abs() < 1e-12);
        assert_eq!(o.k.abs(), 128);

        let w = WeightFunction::japanese();
        let half =
            Symbol::torus(jap(0.5), move |x, k| c((2.0 + x.sin()) * w.pow(k, 0.5))).unwrap();
        let r = check_s_membership(&half, 2, 2, &[32, 64, 128], 16).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn rough_symbol_fails_m_class() {
        let w = WeightFunction::japanese();
        let rough = Symbol::multiplier(jap(1.0), move |k| c((k as f64).sin() * w.eval(k))).unwrap();
        let r = check_m_membership(&rough, 1, 0, &[32, 64, 128], 8).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent);
        assert_eq!(r.k_difference.verdict, Verdict::Inconsistent);
        assert!(r.k_difference.offenses.iter().any(|o| o.gamma == 1 && o.alpha == 0));
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff_psi(0.3, 1.0), 0.0);
        assert_eq!(cutoff_psi(-0.5, 1.0), 0.0);
        assert_eq!(cutoff_psi(1.5, 1.0), 1.0);
        assert_eq!(cutoff_psi(-1.0, 1.0), 1.0);
        let mid = cutoff_psi(0.75, 1.0);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = cutoff_psi(0.5 + i as f64 / 200.0, 1.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(cutoff_psi(30.0, 0.1), 1.0);
    }

    #[test]
    fn asymptotic_sum_rejects_non_decreasing_orders() {
        let a = Symbol::multiplier(jap(0.0), |_| c(1.0)).unwrap();
        let b = Symbol::multiplier(jap(0.0), |_| c(1.0)).unwrap();
        assert!(asymptotic_sum(vec![a, b], EpsRule::Geometric { eps0: 1.0 }).is_err());
    }

    #[test]
    fn single_term_sum_agrees_beyond_cutoff() {
        let w = WeightFunction::japanese();
        let s0 = Symbol::torus(jap(1.0), move |x, k| c((2.0 + x.cos()) * w.eval(k))).unwrap();
        let sum = asymptotic_sum(vec![s0.clone()], EpsRule::Geometric { eps0: 0.125 }).unwrap();
        for k in [8i64, 9, 20, -8, -40] {
            assert_eq!(sum.symbol.column(k, 8), s0.column(k, 8));
        }
        assert!(sum.symbol.column(3, 8).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn geometric_sum_is_a_finite_evaluation() {
        let terms: Vec<Symbol> = (0..16)
            .map(|j| {
                let w = WeightFunction::japanese();
                Symbol::multiplier(jap(-(j as f64)), move |k| c(w.pow(k, -(j as f64)))).unwrap()
            })
            .collect();
        let sum = asymptotic_sum(terms, EpsRule::Geometric { eps0: 1.0 }).unwrap();
        let w = WeightFunction::japanese();
        for k in [1i64, 2, 3, 5, 17, 100, -33] {
            let active = sum.active_terms(k);
            // ψ(2^{-j} k) > 0 iff |k| > 2^{j-1}, i.e. j ≤ ⌈log₂|k|⌉.
            let jmax = (k.abs() as f64).log2().ceil() as usize;
            assert_eq!(active, (0..=jmax).collect::<Vec<_>>(), "k={k}");
            let direct: f64 = (0..=jmax)
                .map(|j| cutoff_psi(k as f64, 0.5f64.powi(j as i32)) * w.pow(k, -(j as f64)))
                .sum();
            assert!((sum.symbol.column(k, 4)[0].re - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn auto_rule_picks_a_dyadic_scale() {
        let terms: Vec<Symbol> = (0..4)
            .map(|j| {
                let w = WeightFunction::japanese();
                Symbol::multiplier(jap(-(j as f64)), move |k| c(2.0 * w.pow(k, -(j as f64))))
                    .unwrap()
            })
            .collect();
        let sum = asymptotic_sum(terms, EpsRule::Auto).unwrap();
        // eps0 = 1 fails at k = 2 for j = 1: 2/<2> > 1/2.
        assert_eq!(sum.eps[0], 0.5);
        assert_eq!(sum.eps[3], 0.0625);
    }
}
