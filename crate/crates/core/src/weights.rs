//! Weight functions `Λ: ℤ → (0, ∞)` with polynomial two-sided growth,
//!
//! ```text
//! C₀ (1+|k|)^{μ₀} ≤ Λ(k) ≤ C₁ (1+|k|)^{μ₁},
//! |k^γ Δ^{α+γ} Λ(k)| ≤ C_{α,γ} Λ(k)^{1-α/μ},   γ ∈ {0, 1},
//! ```
//!
//! and numerical checks of both estimates on finite windows.

use serde::{Deserialize, Serialize};

use crate::difference;
use crate::error::{Error, Result};

/// Window used when a dependent constructor validates a weight.
pub const VALIDATION_WINDOW: i64 = 256;

const GROWTH_TREND_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum WeightKind {
    /// `⟨k⟩ = (1+k²)^{1/2}`.
    Japanese,
    /// `(1+k^{2p})^{1/(2p)}`.
    Power { p: u32 },
    /// `Λ ≡ 1`.
    Constant,
    /// `1/(1+|k|)`: positive but decreasing, so never a weight with `μ₀ ≥ 0`.
    Reciprocal,
    /// Sampled values `Λ(-K..=K)`, extended beyond the table as `Λ(±K)((1+|k|)/(1+K))^{μ₁}`.
    Table { values: Vec<f64> },
}

/// Declared growth and difference exponents with their growth constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub mu0: f64,
    pub mu1: f64,
    pub mu: f64,
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    kind: WeightKind,
    exponents: Exponents,
}

impl WeightFunction {
    pub fn new(kind: WeightKind, exponents: Exponents) -> Result<Self> {
        let Exponents { mu0, mu1, mu, c0, c1 } = exponents;
        if !(mu0 <= mu1 && mu1 <= mu) {
            return Err(Error::InvalidWeight(format!(
                "exponents must satisfy mu0 <= mu1 <= mu, got ({mu0}, {mu1}, {mu})"
            )));
        }
        if !(c0 > 0.0 && c1 > 0.0) {
            return Err(Error::InvalidWeight("growth constants must be positive".into()));
        }
        match &kind {
            WeightKind::Table { values } => {
                if values.len() % 2 == 0 {
                    return Err(Error::InvalidWeight(
                        "a weight table must cover a symmetric window -K..=K".into(),
                    ));
                }
                let half = (values.len() / 2) as i64;
                if let Some((i, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(v.is_finite() && **v > 0.0))
                {
                    return Err(Error::InvalidWeight(format!(
                        "nonpositive value {v} at k={}",
                        i as i64 - half
                    )));
                }
            }
            WeightKind::Power { p } if *p == 0 => {
                return Err(Error::InvalidWeight("power weight needs p >= 1".into()));
            }
            _ => {}
        }
        Ok(Self { kind, exponents })
    }

    /// `⟨k⟩ = (1+k²)^{1/2}` with `μ₀ = μ₁ = μ = 1`.
    pub fn japanese() -> Self {
        Self {
            kind: WeightKind::Japanese,
            exponents: Exponents {
                mu0: 1.0,
                mu1: 1.0,
                mu: 1.0,
                c0: std::f64::consts::FRAC_1_SQRT_2,
                c1: 1.0,
            },
        }
    }

    /// `(1+k^{2p})^{1/(2p)}`; `p = 1` is [`WeightFunction::japanese`].
    pub fn power(p: u32) -> Result<Self> {
        Self::new(
            WeightKind::Power { p },
            Exponents {
                mu0: 1.0,
                mu1: 1.0,
                mu: 1.0,
                c0: 0.5,
                c1: 1.0,
            },
        )
    }

    pub fn constant() -> Self {
        Self {
            kind: WeightKind::Constant,
            exponents: Exponents {
                mu0: 0.0,
                mu1: 0.0,
                mu: 0.0,
                c0: 1.0,
                c1: 1.0,
            },
        }
    }

    pub fn table(values: Vec<f64>, exponents: Exponents) -> Result<Self> {
        Self::new(WeightKind::Table { values }, exponents)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn exponents(&self) -> Exponents {
        self.exponents
    }

    pub fn mu(&self) -> f64 {
        self.exponents.mu
    }

    /// `Λ(k)`; always strictly positive for a constructed weight.
    pub fn eval(&self, k: i64) -> f64 {
        let kf = k as f64;
        match &self.kind {
            WeightKind::Japanese => (1.0 + kf * kf).sqrt(),
            WeightKind::Power { p } => {
                let two_p = 2 * *p as i32;
                (1.0 + kf.abs().powi(two_p)).powf(1.0 / two_p as f64)
            }
            WeightKind::Constant => 1.0,
            WeightKind::Reciprocal => 1.0 / (1.0 + kf.abs()),
            WeightKind::Table { values } => {
                let half = (values.len() / 2) as i64;
                if k.abs() <= half {
                    values[(k + half) as usize]
                } else {
                    let edge = values[(k.signum() * half + half) as usize];
                    edge * ((1.0 + kf.abs()) / (1.0 + half as f64)).powf(self.exponents.mu1)
                }
            }
        }
    }

    /// `Λ(k)^s`.
    pub fn pow(&self, k: i64, s: f64) -> f64 {
        if s == 0.0 {
            1.0
        } else {
            self.eval(k).powf(s)
        }
    }

    /// Tightest two-sided growth constants on `|k| ≤ window`, plus the trend over
    /// `window/4`, `window/2`, `window`.
    pub fn verify_growth(&self, window: i64) -> GrowthReport {
        let window = window.max(1);
        let Exponents { mu0, mu1, c0, c1, .. } = self.exponents;
        let tight = |w: i64| {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for k in -w..=w {
                let base = 1.0 + k.abs() as f64;
                let v = self.eval(k);
                lo = lo.min(v / base.powf(mu0));
                hi = hi.max(v / base.powf(mu1));
            }
            (lo, hi)
        };
        let mut violations = Vec::new();
        for k in -window..=window {
            let base = 1.0 + k.abs() as f64;
            let v = self.eval(k);
            let below = v < c0 * base.powf(mu0) * (1.0 - 1e-12);
            let above = v > c1 * base.powf(mu1) * (1.0 + 1e-12);
            if below || above {
                violations.push(k);
            }
        }
        let trend: Vec<GrowthSample> = [window / 4, window / 2, window]
            .into_iter()
            .filter(|w| *w >= 1)
            .map(|w| {
                let (c0, c1) = tight(w);
                GrowthSample { window: w, c0, c1 }
            })
            .collect();
        let (first, last) = (trend[0], trend[trend.len() - 1]);
        let lower_decays = last.c0 < (1.0 - GROWTH_TREND_TOLERANCE) * first.c0;
        let upper_grows = last.c1 > (1.0 + GROWTH_TREND_TOLERANCE) * first.c1;
        GrowthReport {
            window,
            mu0,
            mu1,
            tight_c0: last.c0,
            tight_c1: last.c1,
            declared_c0: c0,
            declared_c1: c1,
            first_violation: violations.first().copied(),
            violation_count: violations.len(),
            trend,
            passes: violations.is_empty() && !lower_decays && !upper_grows,
        }
    }

    /// Empirical `C_{α,γ} = sup_{|k|≤window} |k^γ Δ^{α+γ}Λ(k)| / Λ(k)^{1-α/μ}`.
    pub fn verify_difference_estimate(&self, alpha_max: u32, window: i64) -> DifferenceReport {
        let mu = self.exponents.mu;
        let mut entries = Vec::new();
        for gamma in 0..=1u32 {
            for alpha in 0..=alpha_max {
                let exponent = if alpha == 0 { 1.0 } else { 1.0 - alpha as f64 / mu };
                let mut best = 0.0f64;
                let mut arg = 0;
                for k in -window..=window {
                    let diff = difference::forward(|j| self.eval(j), alpha + gamma, k);
                    let num = (k as f64).powi(gamma as i32) * diff;
                    if num == 0.0 {
                        continue;
                    }
                    let ratio = num.abs() / self.eval(k).powf(exponent);
                    if ratio > best {
                        best = ratio;
                        arg = k;
                    }
                }
                entries.push(DifferenceConstant {
                    alpha,
                    gamma,
                    constant: best,
                    argmax: arg,
                });
            }
        }
        DifferenceReport {
            window,
            mu,
            entries,
        }
    }

    /// Rejects weights whose declared growth fails on `|k| ≤ 256`.
    pub fn validate(&self) -> Result<()> {
        let report = self.verify_growth(VALIDATION_WINDOW);
        if report.passes {
            Ok(())
        } else {
            Err(Error::InvalidWeight(format!(
                "growth bounds fail on |k| <= {VALIDATION_WINDOW} (first offending k: {:?}, tight C0={:.3e}, C1={:.3e})",
                report.first_violation, report.tight_c0, report.tight_c1
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthSample {
    pub window: i64,
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub window: i64,
    pub mu0: f64,
    pub mu1: f64,
    pub tight_c0: f64,
    pub tight_c1: f64,
    pub declared_c0: f64,
    pub declared_c1: f64,
    pub first_violation: Option<i64>,
    pub violation_count: usize,
    pub trend: Vec<GrowthSample>,
    pub passes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferenceConstant {
    pub alpha: u32,
    pub gamma: u32,
    pub constant: f64,
    pub argmax: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceReport {
    pub window: i64,
    pub mu: f64,
    pub entries: Vec<DifferenceConstant>,
}

impl DifferenceReport {
    pub fn constant(&self, alpha: u32, gamma: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.alpha == alpha && e.gamma == gamma)
            .map(|e| e.constant)
    }
}
