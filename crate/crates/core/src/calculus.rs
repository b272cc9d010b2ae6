//! Composition and adjoint expansions, ellipticity scans and the parametrix.
//!
//! The x-derivative factor of every expansion is applied in Fourier space. Under
//! [`ExpansionRule::Toroidal`] the `α`-th factor multiplies the x-frequency `j` by
//! `j (j-1) ⋯ (j-α+1) / α!`, which makes the expansion an exact Newton series in
//! the discrete variable. [`ExpansionRule::Euclidean`] uses `(-i)^α ∂_x^α / α!`,
//! i.e. the multiplier `j^α / α!`; its remainder stalls at order `-2`.

use std::io::Write;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::Serialize;

use crate::difference::{factorial, falling_factorial};
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::quantization::{default_resolution, matrix, x_bandwidth, DenseOperator};
use crate::symbols::{smooth_step, Side, Symbol};
use crate::weights::WeightFunction;

/// Candidate thresholds scanned by the ellipticity tests.
pub const DEFAULT_R_GRID: [i64; 6] = [0, 1, 2, 4, 8, 16];
/// Smallest lower constant accepted as elliptic.
pub const C_MIN: f64 = 1e-8;
/// Grid resolution of the ellipticity scans.
pub const ELLIPTICITY_RESOLUTION: usize = 64;
/// `|σ|` below this is treated as a zero of the symbol.
pub const SINGULAR_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionRule {
    #[default]
    Toroidal,
    Euclidean,
}

/// The `α`-th x-factor of an expansion applied to `t`.
pub fn x_factor(t: &Symbol, alpha: u32, rule: ExpansionRule) -> Symbol {
    if alpha == 0 {
        return t.clone();
    }
    let fact = factorial(alpha);
    match rule {
        ExpansionRule::Toroidal => t.x_fourier_multiplier(move |j| {
            Complex64::new(falling_factorial(j as f64, alpha) / fact, 0.0)
        }),
        ExpansionRule::Euclidean => t.x_fourier_multiplier(move |j| {
            Complex64::new((j as f64).powi(alpha as i32) / fact, 0.0)
        }),
    }
}

fn require_same_side(s: &Symbol, t: &Symbol) -> Result<()> {
    if s.side() != t.side() {
        return Err(Error::Precondition("symbols live on different sides".into()));
    }
    Ok(())
}

/// `λ_K = Σ_{α<K} (Δ^α σ) · x_factor(τ, α)`, the symbol of `T_σ T_τ` up to order
/// `m + m' - ρK`.
pub fn compose(s: &Symbol, t: &Symbol, k_terms: usize) -> Result<Symbol> {
    compose_with(s, t, k_terms, ExpansionRule::Toroidal)
}

pub fn compose_with(
    s: &Symbol,
    t: &Symbol,
    k_terms: usize,
    rule: ExpansionRule,
) -> Result<Symbol> {
    require_same_side(s, t)?;
    if k_terms == 0 {
        return Err(Error::Precondition("need at least one expansion term".into()));
    }
    let mut acc = s.mul(t);
    for alpha in 1..k_terms as u32 {
        acc = acc.add(&s.forward_difference(alpha).mul(&x_factor(t, alpha, rule)));
    }
    Ok(acc.with_order(s.order() + t.order()))
}

/// `τ_K = Σ_{α<K} Δ^α x_factor(conj σ, α)`, the symbol of `T_σ^*` up to order `m - ρK`.
pub fn formal_adjoint(s: &Symbol, k_terms: usize) -> Result<Symbol> {
    formal_adjoint_with(s, k_terms, ExpansionRule::Toroidal)
}

pub fn formal_adjoint_with(s: &Symbol, k_terms: usize, rule: ExpansionRule) -> Result<Symbol> {
    if k_terms == 0 {
        return Err(Error::Precondition("need at least one expansion term".into()));
    }
    let c = s.conj();
    let mut acc = c.clone();
    for alpha in 1..k_terms as u32 {
        acc = acc.add(&x_factor(&c, alpha, rule).forward_difference(alpha));
    }
    Ok(acc.with_order(s.order()))
}

/// Lower constant for one candidate threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityCandidate {
    pub r: i64,
    /// `min` over `R ≤ |k| ≤ K`.
    pub c_window: f64,
    /// `min` over `R ≤ |k| ≤ 2K`.
    pub c_doubled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    /// Best lower constant (at the doubled window) for the chosen threshold.
    pub c: f64,
    /// Frequency threshold `R`.
    pub r: i64,
    pub is_elliptic: bool,
    pub window: i64,
    pub candidates: Vec<EllipticityCandidate>,
}

/// Scans `|σ(x,k)| / Λ(k)^m` for a lower bound beyond each candidate threshold.
pub fn m_ellipticity(s: &Symbol, window: i64, r_grid: &[i64]) -> EllipticityReport {
    ellipticity(s, window, r_grid, |c| c.norm())
}

/// As [`m_ellipticity`] with `Re σ` in place of `|σ|`.
pub fn strong_m_ellipticity(s: &Symbol, window: i64, r_grid: &[i64]) -> EllipticityReport {
    ellipticity(s, window, r_grid, |c| c.re)
}

fn ellipticity(
    s: &Symbol,
    window: i64,
    r_grid: &[i64],
    f: impl Fn(Complex64) -> f64,
) -> EllipticityReport {
    let s = if s.side() == Side::Lattice { s.dual() } else { s.clone() };
    let m = ELLIPTICITY_RESOLUTION;
    let big = 2 * window;
    // profile[|k|] = min over ±k and the x-grid.
    let profile: Vec<f64> = (0..=big)
        .map(|k| {
            [k, -k]
                .iter()
                .flat_map(|&kk| {
                    let scale = s.weight().pow(kk, s.order());
                    s.column(kk, m).into_iter().map(move |c| (c, scale))
                })
                .map(|(c, scale)| f(c) / scale)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let min_over = |lo: i64, hi: i64| {
        profile[lo as usize..=hi as usize]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    let mut candidates = Vec::new();
    let mut chosen = None;
    for &r in r_grid.iter().filter(|r| **r >= 0 && **r <= window) {
        let cand = EllipticityCandidate {
            r,
            c_window: min_over(r, window),
            c_doubled: min_over(r, big),
        };
        if chosen.is_none()
            && cand.c_doubled >= C_MIN
            && cand.c_doubled >= 0.9 * cand.c_window
        {
            chosen = Some(cand);
        }
        candidates.push(cand);
    }
    match chosen {
        Some(c) => EllipticityReport {
            c: c.c_doubled,
            r: c.r,
            is_elliptic: true,
            window,
            candidates,
        },
        None => EllipticityReport {
            c: candidates.last().map_or(0.0, |c| c.c_doubled.max(0.0)),
            r: candidates.last().map_or(0, |c| c.r),
            is_elliptic: false,
            window,
            candidates,
        },
    }
}

fn singular_scan(s: &Symbol, from: f64, to: i64) -> Result<()> {
    for k in (0..=to).filter(|k| *k as f64 > from) {
        for kk in [k, -k] {
            let min = s
                .column(kk, ELLIPTICITY_RESOLUTION)
                .iter()
                .map(|c| c.norm())
                .fold(f64::INFINITY, f64::min);
            if min < SINGULAR_TOLERANCE {
                return Err(Error::SingularSymbol { k: kk, value: min });
            }
        }
    }
    Ok(())
}

fn reciprocal_with_cutoff(
    s: &Symbol,
    psi: impl Fn(i64) -> f64 + Send + Sync + 'static,
) -> Symbol {
    let inner = s.clone();
    let class = s.class().clone();
    Symbol::derived(
        crate::symbols::SymbolClass {
            order: -class.order,
            ..class
        },
        s.side(),
        move |k, m| {
            let w = psi(k);
            if w == 0.0 {
                return vec![Complex64::new(0.0, 0.0); m];
            }
            inner.column(k, m).into_iter().map(|c| w / c).collect()
        },
    )
}

/// `q = ψ/σ` with `ψ = 0` on `|k| ≤ R'` and `ψ = 1` on `|k| ≥ R''`; order `-m`.
pub fn inverse_cutoff_symbol(s: &Symbol, r1: f64, r2: f64) -> Result<Symbol> {
    if !(r1 >= 0.0 && r2 > r1) {
        return Err(Error::Precondition(format!(
            "need R'' > R' >= 0, got R' = {r1}, R'' = {r2}"
        )));
    }
    singular_scan(s, r1, (4.0 * r2).ceil().max(256.0) as i64)?;
    Ok(reciprocal_with_cutoff(s, move |k| smooth_step(r1, r2, k.abs() as f64)))
}

/// Cutoff of the leading parametrix term: 0 on `|k| ≤ R`, 1 on `|k| ≥ 2R`.
pub fn parametrix_cutoff(r: i64, k: i64) -> f64 {
    if k.abs() <= r {
        0.0
    } else {
        smooth_step(r as f64, 2.0 * r as f64, k.abs() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct Parametrix {
    /// `τ = Σ_{l<L} τ_l`, declared order `-m`.
    pub symbol: Symbol,
    /// `τ_l`, declared order `-m - ρl`.
    pub terms: Vec<Symbol>,
    pub threshold: i64,
    pub ellipticity: EllipticityReport,
}

/// Left parametrix of length `length` with cutoff threshold `r`.
pub fn parametrix(s: &Symbol, length: usize, r: i64) -> Result<Parametrix> {
    parametrix_with(s, length, r, ExpansionRule::Toroidal)
}

/// Parametrix with the threshold picked by [`m_ellipticity`].
pub fn parametrix_auto(s: &Symbol, length: usize) -> Result<Parametrix> {
    let rep = m_ellipticity(s, 64, &DEFAULT_R_GRID);
    if !rep.is_elliptic {
        return Err(Error::NotElliptic(format!(
            "no lower constant >= {C_MIN} found on |k| <= 128"
        )));
    }
    parametrix_with(s, length, rep.r, ExpansionRule::Toroidal)
}

pub fn parametrix_with(
    s: &Symbol,
    length: usize,
    r: i64,
    rule: ExpansionRule,
) -> Result<Parametrix> {
    if length == 0 {
        return Err(Error::Precondition("parametrix length must be >= 1".into()));
    }
    let rep = m_ellipticity(s, 64, &DEFAULT_R_GRID);
    if !rep.is_elliptic {
        return Err(Error::NotElliptic(format!(
            "no lower constant >= {C_MIN} found on |k| <= 128"
        )));
    }
    if r < rep.r {
        return Err(Error::Precondition(format!(
            "threshold {r} is below the ellipticity threshold {}",
            rep.r
        )));
    }
    singular_scan(s, r as f64, 256)?;
    let tau0 = reciprocal_with_cutoff(s, move |k| parametrix_cutoff(r, k));
    let mut terms = vec![tau0.clone()];
    for l in 1..length {
        let mut bracket: Option<Symbol> = None;
        for gamma in 1..=l as u32 {
            let term = x_factor(s, gamma, rule).mul(&terms[l - gamma as usize].forward_difference(gamma));
            bracket = Some(match bracket {
                None => term,
                Some(b) => b.add(&term),
            });
        }
        let tl = bracket
            .expect("l >= 1")
            .mul(&tau0)
            .scale(Complex64::new(-1.0, 0.0))
            .with_order(-s.order() - s.rho() * l as f64);
        terms.push(tl);
    }
    let mut symbol = terms[0].clone();
    for t in &terms[1..] {
        symbol = symbol.add(t);
    }
    Ok(Parametrix {
        symbol: symbol.with_order(-s.order()),
        terms,
        threshold: r,
        ellipticity: rep,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub k: i64,
    pub weight: f64,
    /// `‖(T_τ T_σ - I) e_k‖₂`.
    pub left: f64,
    /// `‖(T_σ T_τ - I) e_k‖₂`.
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualProfile {
    pub n: usize,
    /// Largest `|k|` reported; columns beyond are corrupted by truncation.
    pub interior: i64,
    pub rows: Vec<ResidualRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSide {
    Left,
    Right,
}

impl ResidualProfile {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "residual_left", "residual_right"])?;
        for r in &self.rows {
            wtr.serialize((r.k, r.left, r.right))?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    fn band(&self, band: &RangeInclusive<i64>) -> impl Iterator<Item = &ResidualRow> {
        let band = band.clone();
        self.rows.iter().filter(move |r| band.contains(&r.k.abs()))
    }

    /// Slope of `log residual` against `log Λ(k)` over `|k|` in `band`.
    pub fn decay_slope(&self, band: RangeInclusive<i64>, side: ResidualSide) -> Option<f64> {
        loglog_slope(self.band(&band).map(|r| {
            (
                r.weight,
                match side {
                    ResidualSide::Left => r.left,
                    ResidualSide::Right => r.right,
                },
            )
        }))
    }

    /// Largest residual over `|k|` in `band`.
    pub fn max_in(&self, band: RangeInclusive<i64>, side: ResidualSide) -> f64 {
        self.band(&band)
            .map(|r| match side {
                ResidualSide::Left => r.left,
                ResidualSide::Right => r.right,
            })
            .fold(0.0, f64::max)
    }
}

/// Per-frequency residuals of `T_t T_s - I` and `T_s T_t - I` on interior columns.
pub fn parametrix_residual(s: &Symbol, t: &Symbol, n: usize) -> Result<ResidualProfile> {
    let (a_s, a_t) = (matrix(s, n)?, matrix(t, n)?);
    let id = DenseOperator::identity(n);
    let left = a_t.mul(&a_s)?.sub(&id)?;
    let right = a_s.mul(&a_t)?.sub(&id)?;
    let m = default_resolution(n);
    let b = x_bandwidth(s, n, m).max(x_bandwidth(t, n, m)) as i64;
    let interior = n as i64 - b;
    let col_norm = |a: &DenseOperator, k: i64| {
        let ni = n as i64;
        (-ni..=ni).map(|r| a.entry(r, k).norm_sqr()).sum::<f64>().sqrt()
    };
    let rows = (-interior..=interior)
        .map(|k| ResidualRow {
            k,
            weight: s.weight().eval(k),
            left: col_norm(&left, k),
            right: col_norm(&right, k),
        })
        .collect();
    Ok(ResidualProfile { n, interior, rows })
}

/// Max-abs of one column of a matrix difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnResidual {
    pub l: i64,
    pub weight: f64,
    pub max_abs: f64,
}

/// Column-wise max-abs of `a - b` over columns with `|l|` in `band`.
pub fn column_residuals(
    a: &DenseOperator,
    b: &DenseOperator,
    band: RangeInclusive<i64>,
    w: &WeightFunction,
) -> Result<Vec<ColumnResidual>> {
    let d = a.sub(b)?;
    let ni = a.radius() as i64;
    Ok((-ni..=ni)
        .filter(|l| band.contains(&l.abs()))
        .map(|l| ColumnResidual {
            l,
            weight: w.eval(l),
            max_abs: (-ni..=ni).map(|k| d.entry(k, l).norm()).fold(0.0, f64::max),
        })
        .collect())
}

pub fn max_column_residual(r: &[ColumnResidual]) -> f64 {
    r.iter().map(|c| c.max_abs).fold(0.0, f64::max)
}

pub fn column_residual_slope(r: &[ColumnResidual]) -> Option<f64> {
    loglog_slope(r.iter().map(|c| (c.weight, c.max_abs)))
}
