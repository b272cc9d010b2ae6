//! Gohberg bound, compactness verdicts, weighted norms and Gårding constants.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{m_ellipticity, DEFAULT_R_GRID};
use crate::error::{Error, Result};
use crate::fourier::{forward_transform, CoeffVector, GridFunction};
use crate::quantization::{default_resolution, duality_transfer, lattice_matrix, matrix, DenseOperator};
use crate::symbols::{check_m_membership, Side, Symbol, Verdict};
use crate::weights::WeightFunction;

/// Resolution of the x-grid used for `sup_x` and sign scans.
pub const SCAN_RESOLUTION: usize = 64;
/// Largest admissible lower-order constant `C₁`.
pub const C1_MAX: f64 = 1e6;
/// Smallest admissible leading constant `C₀`.
pub const C0_MIN: f64 = 1e-8;
/// Resolution to which `C₀` is reported.
pub const C0_RESOLUTION: f64 = 1e-6;
/// Eigenvalues above `-PSD_TOLERANCE` count as nonnegative.
pub const PSD_TOLERANCE: f64 = 1e-10;

fn torus_view(s: &Symbol) -> Symbol {
    if s.side() == Side::Lattice {
        s.dual()
    } else {
        s.clone()
    }
}

fn sup_abs(s: &Symbol, k: i64) -> f64 {
    s.column(k, SCAN_RESOLUTION)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// Tail maxima fall by at least half from `K₀` to `4K₀` and end below the threshold.
    Vanishing,
    /// Tail maxima stay above the threshold without decaying.
    Persistent,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GohbergReport {
    pub k0: i64,
    pub k_max: i64,
    /// `(|k|, max over ±k and x of |σ(x,k)|)` for `0 ≤ |k| ≤ max(K_max, 4K₀)`.
    pub profile: Vec<(i64, f64)>,
    /// `max_{K₀ ≤ |k| ≤ K_max}` of the profile.
    pub d_estimate: f64,
    pub d_k0: f64,
    pub d_2k0: f64,
    pub d_4k0: f64,
}

impl GohbergReport {
    /// Tail maximum of the profile from `|k| = from` to the end of the profile.
    pub fn tail_max(&self, from: i64) -> f64 {
        self.profile
            .iter()
            .filter(|(k, _)| *k >= from)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }

    /// Largest value of the profile anywhere.
    pub fn peak(&self) -> f64 {
        self.tail_max(0)
    }

    pub fn trend(&self, threshold: f64) -> Trend {
        if self.d_4k0 <= 0.5 * self.d_k0 && self.d_4k0 < threshold {
            Trend::Vanishing
        } else if self.d_4k0 >= threshold && self.d_4k0 >= 0.75 * self.d_k0 {
            Trend::Persistent
        } else {
            Trend::Undetermined
        }
    }
}

/// Tail maxima of `sup_x |σ(x,k)|`.
pub fn gohberg_d(s: &Symbol, k0: i64, k_max: i64) -> Result<GohbergReport> {
    if k0 < 0 || k_max < 2 * k0 {
        return Err(Error::Precondition(format!(
            "need K_max >= 2 K0 >= 0, got K0 = {k0}, K_max = {k_max}"
        )));
    }
    let s = torus_view(s);
    let hi = k_max.max(4 * k0);
    let profile: Vec<(i64, f64)> = (0..=hi)
        .map(|k| (k, sup_abs(&s, k).max(sup_abs(&s, -k))))
        .collect();
    let mut rep = GohbergReport {
        k0,
        k_max,
        d_estimate: 0.0,
        d_k0: 0.0,
        d_2k0: 0.0,
        d_4k0: 0.0,
        profile,
    };
    rep.d_estimate = rep
        .profile
        .iter()
        .filter(|(k, _)| *k >= k0 && *k <= k_max)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    rep.d_k0 = rep.tail_max(k0);
    rep.d_2k0 = rep.tail_max(2 * k0);
    rep.d_4k0 = rep.tail_max(4 * k0);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessThresholds {
    pub k0: i64,
    /// `d` threshold as a fraction of the profile peak.
    pub relative_threshold: f64,
    /// Truncations used for singular-value evidence.
    pub ns: Vec<usize>,
    /// Singular-value cutoffs as fractions of the profile peak.
    pub eps_fractions: Vec<f64>,
    /// Margin below `d` in the "not compact" count.
    pub d_margin: f64,
}

impl Default for CompactnessThresholds {
    fn default() -> Self {
        Self {
            k0: 16,
            relative_threshold: 0.1,
            ns: vec![16, 32, 64],
            eps_fractions: vec![0.25, 0.1],
            d_margin: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactnessVerdict {
    Compact,
    NotCompact,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvCount {
    pub eps: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvEvidence {
    pub n: usize,
    pub largest: f64,
    /// Number of singular values above each `eps`.
    pub above_eps: Vec<SvCount>,
    /// Number of singular values `≥ d - margin`.
    pub near_d: usize,
    /// Singular values of `AA* - A*A` above `0.01 ‖A‖²`.
    pub commutator_above: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub verdict: CompactnessVerdict,
    pub trend: Trend,
    pub threshold: f64,
    pub gohberg: GohbergReport,
    pub singular_values: Vec<SvEvidence>,
    /// Counts above each `eps` settle (change by at most 2) between the last two truncations.
    pub counts_stabilize: bool,
    /// Counts near `d` grow in proportion to `N`.
    pub near_d_grows_linearly: bool,
}

/// Compactness from the Gohberg trend, cross-checked by singular values of truncations.
pub fn compactness_verdict(s: &Symbol, th: &CompactnessThresholds) -> Result<CompactnessReport> {
    if th.ns.len() < 2 {
        return Err(Error::Precondition("need at least two truncations".into()));
    }
    let t = torus_view(s);
    let membership = check_m_membership(&t.with_order(0.0), 2, 1, &[16, 32, 64], 16)?;
    if membership.verdict != Verdict::Consistent {
        return Err(Error::Precondition("symbol is not consistent with order 0".into()));
    }
    let gohberg = gohberg_d(&t, th.k0, 4 * th.k0)?;
    let peak = gohberg.peak();
    let threshold = th.relative_threshold * peak;
    let trend = if peak == 0.0 {
        Trend::Vanishing
    } else {
        gohberg.trend(threshold)
    };
    let d = gohberg.d_4k0;
    let mut evidence = Vec::new();
    for &n in &th.ns {
        let a = matrix(&t, n)?;
        let sv = a.singular_values();
        let comm = DenseOperator::new(
            n,
            a.matrix() * a.matrix().adjoint() - a.matrix().adjoint() * a.matrix(),
        )?;
        let norm2 = sv[0] * sv[0];
        let comm_sv = comm.singular_values();
        evidence.push(SvEvidence {
            n,
            largest: sv[0],
            above_eps: th
                .eps_fractions
                .iter()
                .map(|f| {
                    let eps = f * peak;
                    SvCount {
                        eps,
                        count: sv.iter().filter(|v| **v > eps).count(),
                    }
                })
                .collect(),
            near_d: sv.iter().filter(|v| **v >= d - th.d_margin).count(),
            commutator_above: comm_sv.iter().filter(|v| **v > 0.01 * norm2).count(),
        });
    }
    let (prev, last) = (&evidence[evidence.len() - 2], &evidence[evidence.len() - 1]);
    let counts_stabilize = prev
        .above_eps
        .iter()
        .zip(&last.above_eps)
        .all(|(a, b)| b.count <= a.count + 2);
    let (first, last_n) = (&evidence[0], &evidence[evidence.len() - 1]);
    let near_d_grows_linearly = d > th.d_margin
        && evidence.windows(2).all(|w| w[1].near_d > w[0].near_d)
        && (last_n.near_d as f64) >= 0.8 * (first.near_d as f64) * (last_n.n as f64 / first.n as f64);
    let verdict = match trend {
        Trend::Vanishing if counts_stabilize => CompactnessVerdict::Compact,
        Trend::Persistent if near_d_grows_linearly => CompactnessVerdict::NotCompact,
        _ => CompactnessVerdict::Inconclusive,
    };
    Ok(CompactnessReport {
        verdict,
        trend,
        threshold,
        gohberg,
        singular_values: evidence,
        counts_stabilize,
        near_d_grows_linearly,
    })
}

/// Lower bound for the distance from `T_σ` to the compact operators: the tail
/// maximum of the Gohberg profile from `4K₀` (default `K₀ = 16`) to `4K₀ + 64`.
pub fn distance_to_compacts_lower_bound(s: &Symbol) -> Result<f64> {
    let k0 = 16;
    let rep = gohberg_d(s, 4 * k0, 4 * k0 + 64)?;
    Ok(rep.d_estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EssentialSpectrum {
    /// The essential spectrum is `{0}`.
    Zero,
    NotApplicable,
}

/// `{0}` when the Gohberg trend vanishes; otherwise the criterion says nothing.
pub fn essential_spectrum_estimate(s: &Symbol) -> Result<EssentialSpectrum> {
    let rep = gohberg_d(s, 16, 64)?;
    let peak = rep.peak();
    Ok(if peak == 0.0 || rep.trend(0.1 * peak) == Trend::Vanishing {
        EssentialSpectrum::Zero
    } else {
        EssentialSpectrum::NotApplicable
    })
}

/// `(2π Σ_k Λ(k)^{2s} |f̂(k)|²)^{1/2}` over all resolved frequencies.
pub fn sobolev_norm(f: &GridFunction, s: f64, w: &WeightFunction) -> f64 {
    let n = (f.len() - 1) / 2;
    let fh = forward_transform(f, n).expect("radius fits the grid");
    coeff_sobolev_norm(&fh, s, w)
}

/// Sobolev norm of the function with coefficients `c`.
pub fn coeff_sobolev_norm(c: &CoeffVector, s: f64, w: &WeightFunction) -> f64 {
    (2.0 * PI).sqrt() * weighted_l2_lattice_norm(c, s, w)
}

/// `(Σ_k Λ(k)^{2s} |f(k)|²)^{1/2}`.
pub fn weighted_l2_lattice_norm(f: &CoeffVector, s: f64, w: &WeightFunction) -> f64 {
    f.iter()
        .map(|(k, c)| w.pow(k, 2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Per-truncation data of a Gårding extraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GardingStep {
    pub n: usize,
    /// Smallest eigenvalue of `G^{-1/2} S G^{-1/2}` on `|k| ≥ N/2`.
    pub c0_n: f64,
    /// Smallest eigenvalue of `S - C₀ G` (global `C₀`).
    pub min_eigenvalue: f64,
    pub c1_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GardingReport {
    pub m: f64,
    pub c0: f64,
    pub c1: f64,
    pub ns: Vec<usize>,
    pub trajectory: Vec<GardingStep>,
    /// Per-truncation `C₀` values agree within 10%.
    pub c0_stable: bool,
    /// Threshold beyond which `Re σ ≥ 0` was observed.
    pub nonnegative_from: i64,
}

impl GardingReport {
    /// `Re⟨Af̂, f̂⟩ + C₁‖f̂‖² - C₀ Σ Λ^{2m}|f̂|²` in coefficient space.
    pub fn margin(&self, a: &DenseOperator, f: &CoeffVector, w: &WeightFunction) -> Result<f64> {
        let af = a.apply_coeffs(f)?;
        let form: f64 = f.iter().map(|(k, c)| (c.conj() * af.get(k)).re).sum();
        let l2 = f.l2_seq_norm().powi(2);
        let hm = weighted_l2_lattice_norm(f, self.m, w).powi(2);
        Ok(form + self.c1 * l2 - self.c0 * hm)
    }
}

fn hermitian_part(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn min_eigenvalue(h: DMatrix<Complex64>) -> f64 {
    let h = hermitian_part(&h);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn nonnegative_threshold(s: &Symbol, window: i64) -> Option<i64> {
    // Smallest K with Re σ ≥ 0 on K ≤ |k| ≤ window.
    let neg = |k: i64| {
        s.column(k, SCAN_RESOLUTION)
            .iter()
            .any(|c| c.re < -1e-12 * c.norm().max(1.0))
    };
    let mut last_bad = None;
    for k in 0..=window {
        if neg(k) || neg(-k) {
            last_bad = Some(k);
        }
    }
    match last_bad {
        None => Some(0),
        Some(k) if k < window / 2 => Some(k + 1),
        Some(_) => None,
    }
}

fn garding_hypotheses(s: &Symbol, m: f64) -> Result<i64> {
    if (s.order() - 2.0 * m).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "symbol order {} is not 2m = {}",
            s.order(),
            2.0 * m
        )));
    }
    let ell = m_ellipticity(s, 64, &DEFAULT_R_GRID);
    if !ell.is_elliptic {
        return Err(Error::GardingFails("symbol is not M-elliptic".into()));
    }
    nonnegative_threshold(s, 128)
        .ok_or_else(|| Error::GardingFails("Re sigma is negative at high frequencies".into()))
}

/// `(C₀, C₁)` from Hermitian parts of Galerkin matrices.
///
/// For each `N`, `C₀(N)` is the smallest eigenvalue of `G^{-1/2} S G^{-1/2}`
/// restricted to the high band `|k| ≥ N/2`, where `G = diag(Λ^{2m})` and
/// `S = (A + A*)/2`. The reported `C₀` is the minimum over `N`, rounded down to
/// [`C0_RESOLUTION`]; `C₁` is the smallest shift making `S + C₁ - C₀ G`
/// nonnegative at every tested `N`.
pub fn garding_constants(s: &Symbol, m: f64, ns: &[usize]) -> Result<GardingReport> {
    let t = torus_view(s);
    let nonnegative_from = garding_hypotheses(&t, m)?;
    let mats = ns
        .iter()
        .map(|&n| Ok((n, matrix(&t, n)?.into_matrix())))
        .collect::<Result<Vec<_>>>()?;
    garding_from_matrices(&mats, m, t.weight(), nonnegative_from)
}

fn garding_from_matrices(
    mats: &[(usize, DMatrix<Complex64>)],
    m: f64,
    w: &WeightFunction,
    nonnegative_from: i64,
) -> Result<GardingReport> {
    if mats.is_empty() {
        return Err(Error::Precondition("no truncations given".into()));
    }
    let mut c0_ns = Vec::new();
    for (n, a) in mats {
        let ni = *n as i64;
        let s = hermitian_part(a);
        let band: Vec<i64> = (-ni..=ni).filter(|k| 2 * k.abs() >= ni).collect();
        let h = DMatrix::from_fn(band.len(), band.len(), |i, j| {
            let (k, l) = (band[i], band[j]);
            s[((k + ni) as usize, (l + ni) as usize)] / (w.pow(k, m) * w.pow(l, m))
        });
        c0_ns.push(min_eigenvalue(h));
    }
    let raw = c0_ns.iter().copied().fold(f64::INFINITY, f64::min);
    let c0 = ((raw + 1e-12) / C0_RESOLUTION).floor() * C0_RESOLUTION;
    if !(c0 >= C0_MIN) {
        return Err(Error::GardingFails(format!(
            "leading constant {raw:e} is below {C0_MIN:e}"
        )));
    }
    let mut trajectory = Vec::new();
    for ((n, a), c0_n) in mats.iter().zip(&c0_ns) {
        let ni = *n as i64;
        let mut shifted = hermitian_part(a);
        for k in -ni..=ni {
            let i = (k + ni) as usize;
            shifted[(i, i)] -= Complex64::new(c0 * w.pow(k, 2.0 * m), 0.0);
        }
        let lam = min_eigenvalue(shifted);
        trajectory.push(GardingStep {
            n: *n,
            c0_n: *c0_n,
            min_eigenvalue: lam,
            c1_n: (-lam - PSD_TOLERANCE).max(0.0),
        });
    }
    let c1 = trajectory.iter().map(|t| t.c1_n).fold(0.0, f64::max);
    if c1 > C1_MAX {
        return Err(Error::GardingFails(format!("C1 = {c1:e} exceeds {C1_MAX:e}")));
    }
    let hi = c0_ns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GardingReport {
        m,
        c0,
        c1,
        ns: mats.iter().map(|(n, _)| *n).collect(),
        trajectory,
        c0_stable: (hi - raw) <= 0.1 * hi.abs(),
        nonnegative_from,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpGardingReport {
    pub c: f64,
    /// `(N, max(0, -λ_min))` per truncation.
    pub trajectory: Vec<(usize, f64)>,
}

/// `C = max_N max(0, -λ_min(G'^{-1/2} S G'^{-1/2}))` with `G' = diag(Λ^{m-1})`.
pub fn sharp_garding_constant(s: &Symbol, ns: &[usize]) -> Result<SharpGardingReport> {
    let t = torus_view(s);
    let window = ns.iter().copied().max().unwrap_or(0) as i64;
    for k in -window..=window {
        for v in t.column(k, SCAN_RESOLUTION) {
            let tol = 1e-12 * v.norm().max(1.0);
            if v.re < -tol || v.im.abs() > tol {
                return Err(Error::Precondition(format!(
                    "symbol is not nonnegative at k = {k} (value {v})"
                )));
            }
        }
    }
    let m = t.order();
    let w = t.weight();
    let mut trajectory = Vec::new();
    for &n in ns {
        let ni = n as i64;
        let a = matrix(&t, n)?.into_matrix();
        let sm = hermitian_part(&a);
        let h = DMatrix::from_fn(2 * n + 1, 2 * n + 1, |i, j| {
            let (k, l) = (i as i64 - ni, j as i64 - ni);
            sm[(i, j)] / (w.pow(k, (m - 1.0) / 2.0) * w.pow(l, (m - 1.0) / 2.0))
        });
        trajectory.push((n, (-min_eigenvalue(h)).max(0.0)));
    }
    let c = trajectory.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    Ok(SharpGardingReport { c, trajectory })
}

/// Random-sequence check of a Gårding inequality on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpotCheck {
    pub samples: usize,
    pub seed: u64,
    /// Smallest `margin / ‖f‖²_{ℓ²_m}` observed.
    pub worst_relative_margin: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeGardingReport {
    pub constants: GardingReport,
    pub spot_check: SpotCheck,
}

/// Gårding constants of a lattice symbol, extracted from its own lattice matrices,
/// then spot-checked on `samples` random windowed sequences.
pub fn garding_lattice(
    s: &Symbol,
    m: f64,
    ns: &[usize],
    samples: usize,
    seed: u64,
) -> Result<LatticeGardingReport> {
    let tau = duality_transfer(s)?;
    let nonnegative_from = garding_hypotheses(&tau, m)?;
    let mats = ns
        .iter()
        .map(|&n| Ok((n, lattice_matrix(s, n, default_resolution(n))?.into_matrix())))
        .collect::<Result<Vec<_>>>()?;
    let constants = garding_from_matrices(&mats, m, s.weight(), nonnegative_from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for i in 0..samples {
        let (n, a) = &mats[i % mats.len()];
        let f = random_coefficients(&mut rng, *n);
        let v = DVector::from_column_slice(f.as_slice());
        let form = (v.adjoint() * a * &v)[(0, 0)].re;
        let l2 = f.l2_seq_norm().powi(2);
        let hm = weighted_l2_lattice_norm(&f, m, s.weight()).powi(2);
        let rel = (form + constants.c1 * l2 - constants.c0 * hm) / hm;
        worst = worst.min(rel);
        if rel < -1e-8 {
            violations += 1;
        }
    }
    Ok(LatticeGardingReport {
        constants,
        spot_check: SpotCheck {
            samples,
            seed,
            worst_relative_margin: worst,
            violations,
        },
    })
}

/// Coefficients with independent standard normal-ish real and imaginary parts.
pub fn random_coefficients(rng: &mut impl Rng, n: usize) -> CoeffVector {
    CoeffVector::from_fn(n, |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::inverse_transform;
    use crate::quantization::bessel_potential;
    use crate::symbols::SymbolClass;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn jap(order: f64) -> SymbolClass {
        SymbolClass::new(order, 1.0, WeightFunction::japanese())
    }

    fn bracket(order: f64) -> Symbol {
        let w = WeightFunction::japanese();
        Symbol::multiplier(jap(order), move |k| c(w.pow(k, order))).unwrap()
    }

    #[test]
    fn gohberg_examples() {
        let s = Symbol::torus(jap(-1.0), |x, k| c(x.sin() / (1.0 + k.abs() as f64))).unwrap();
        let r = gohberg_d(&s, 8, 32).unwrap();
        assert!(r.d_4k0 < r.d_2k0 && r.d_2k0 < r.d_k0);
        let s = Symbol::torus(jap(0.0), |x, _| c(2.0 + x.cos())).unwrap();
        let r = gohberg_d(&s, 8, 32).unwrap();
        assert_eq!(r.d_estimate, 3.0);
        let w = WeightFunction::japanese();
        let s = Symbol::torus(jap(-0.5), move |x, k| c(w.pow(k, -0.5) * (2.0 + x.sin()))).unwrap();
        let r = gohberg_d(&s, 64, 128).unwrap();
        assert!((r.d_estimate - 3.0 * (1.0f64 + 64.0 * 64.0).powf(-0.25)).abs() < 1e-14);
        assert!(gohberg_d(&s, 8, 15).is_err());
    }

    #[test]
    fn gohberg_monotone_in_k0() {
        let s = Symbol::torus(jap(0.0), |x, k| c((x + k as f64).cos() * (1.0 + 1.0 / (1.0 + k.abs() as f64))))
            .unwrap();
        let mut prev = f64::INFINITY;
        for k0 in [1, 2, 4, 8, 16] {
            let d = gohberg_d(&s, k0, 64).unwrap().d_estimate;
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn compactness_examples() {
        let th = CompactnessThresholds::default();
        let r = compactness_verdict(&bracket(-1.0), &th).unwrap();
        assert_eq!(r.verdict, CompactnessVerdict::Compact);
        let one = bracket(0.0);
        let r = compactness_verdict(&one, &th).unwrap();
        assert_eq!(r.verdict, CompactnessVerdict::NotCompact);
        assert!(r.singular_values.iter().all(|e| e.near_d == 2 * e.n + 1));
        let s = Symbol::torus(jap(-1.0), |x, k| c((2.0 + x.cos()) / (1.0 + k.abs() as f64))).unwrap();
        let r = compactness_verdict(&s, &th).unwrap();
        assert_eq!(r.verdict, CompactnessVerdict::Compact);
        assert!(r.counts_stabilize);
    }

    #[test]
    fn distance_lower_bound_examples() {
        let zero = Symbol::multiplier(jap(0.0), |_| c(0.0)).unwrap();
        assert_eq!(distance_to_compacts_lower_bound(&zero).unwrap(), 0.0);
        let s = Symbol::torus(jap(0.0), |x, _| c(x.sin())).unwrap();
        assert!((distance_to_compacts_lower_bound(&s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn essential_spectrum_examples() {
        assert_eq!(essential_spectrum_estimate(&bracket(-1.0)).unwrap(), EssentialSpectrum::Zero);
        assert_eq!(
            essential_spectrum_estimate(&bracket(0.0)).unwrap(),
            EssentialSpectrum::NotApplicable
        );
        let w = WeightFunction::japanese();
        let s = Symbol::torus(jap(-1.0), move |x, k| c((2.0 + x.sin()) / w.eval(k))).unwrap();
        assert_eq!(essential_spectrum_estimate(&s).unwrap(), EssentialSpectrum::Zero);
    }

    #[test]
    fn norm_examples() {
        let w = WeightFunction::japanese();
        let f = GridFunction::from_fn(16, |x| Complex64::from_polar(1.0, 3.0 * x));
        let want = (2.0 * PI).sqrt() * 10f64.sqrt();
        assert!((sobolev_norm(&f, 1.0, &w) - want).abs() < 1e-12);
        assert!((sobolev_norm(&f, 0.0, &w) - crate::fourier::l2_norm(&f)).abs() < 1e-12);
        let d = CoeffVector::delta(4, 2);
        assert!((weighted_l2_lattice_norm(&d, 1.0, &w) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(weighted_l2_lattice_norm(&d, 0.0, &w), 1.0);
    }

    #[test]
    fn bessel_shifts_sobolev_index() {
        let w = WeightFunction::japanese();
        let coeffs = CoeffVector::from_fn(6, |k| Complex64::new(1.0 / (1.0 + (k * k) as f64), k as f64));
        let f = inverse_transform(&coeffs, 16).unwrap();
        let j = crate::quantization::apply(&bessel_potential(1.5, w.clone()).unwrap(), &f, 6).unwrap();
        let lhs = sobolev_norm(&j, 0.5, &w);
        let rhs = sobolev_norm(&f, -1.0, &w);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn garding_exact_for_weight_powers() {
        let r = garding_constants(&bracket(2.0), 1.0, &[8, 16]).unwrap();
        assert_eq!(r.c0, 1.0);
        assert_eq!(r.c1, 0.0);
        let r = garding_constants(&bracket(-2.0).scale(c(-1.0)).with_order(2.0), 1.0, &[8]);
        assert!(r.is_err());
        let neg = Symbol::multiplier(jap(2.0), |k| c(-1.0 - (k * k) as f64)).unwrap();
        assert!(matches!(
            garding_constants(&neg, 1.0, &[8, 16]),
            Err(Error::GardingFails(_))
        ));
    }

    #[test]
    fn garding_spot_check() {
        let w = WeightFunction::japanese();
        let s = Symbol::torus(jap(2.0), move |x, k| c(w.pow(k, 2.0) * (2.0 + x.sin()))).unwrap();
        let r = garding_constants(&s, 1.0, &[16, 32]).unwrap();
        assert!(r.c0 >= 0.5 && r.c0_stable);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = WeightFunction::japanese();
        for (i, n) in [16usize, 32].iter().enumerate() {
            let a = matrix(&s, *n).unwrap();
            for _ in 0..50 + i {
                let f = random_coefficients(&mut rng, *n);
                let margin = r.margin(&a, &f, &w).unwrap();
                let hm = weighted_l2_lattice_norm(&f, 1.0, &w).powi(2);
                assert!(margin >= -1e-8 * hm);
            }
        }
    }

    #[test]
    fn sharp_garding_examples() {
        assert_eq!(sharp_garding_constant(&bracket(1.0), &[8, 16]).unwrap().c, 0.0);
        let zero = Symbol::multiplier(jap(1.0), |_| c(0.0)).unwrap();
        assert_eq!(sharp_garding_constant(&zero, &[8]).unwrap().c, 0.0);
        let w = WeightFunction::japanese();
        let s = Symbol::torus(jap(1.0), move |x, k| c(w.eval(k) * x.sin())).unwrap();
        assert!(sharp_garding_constant(&s, &[8]).is_err());
    }

    #[test]
    fn lattice_garding_matches_torus_path() {
        let w = WeightFunction::japanese();
        let s = Symbol::lattice(jap(2.0), move |p, x| c(w.pow(p, 2.0) * (2.0 + x.cos()))).unwrap();
        let lat = garding_lattice(&s, 1.0, &[8, 16], 50, 3).unwrap();
        let tor = garding_constants(&duality_transfer(&s).unwrap(), 1.0, &[8, 16]).unwrap();
        assert!((lat.constants.c0 - tor.c0).abs() < 1e-6);
        assert!((lat.constants.c1 - tor.c1).abs() < 1e-6);
        assert_eq!(lat.spot_check.violations, 0);

        let w = WeightFunction::japanese();
        let pure = Symbol::lattice(jap(2.0), move |p, _| c(w.pow(p, 2.0))).unwrap();
        let r = garding_lattice(&pure, 1.0, &[8, 16], 20, 1).unwrap();
        assert_eq!((r.constants.c0, r.constants.c1), (1.0, 0.0));
    }
}
