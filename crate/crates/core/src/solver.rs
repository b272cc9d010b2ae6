//! Galerkin solves of `(T_σ + λ) u = f` on the circle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{parametrix_auto, parametrix_cutoff, strong_m_ellipticity, DEFAULT_R_GRID};
use crate::diagnostics::garding_constants;
use crate::error::{Error, Result};
use crate::fourier::{forward_transform, inverse_transform, l2_norm, CoeffVector, GridFunction};
use crate::oracle::synthesis_oracle;
use crate::quantization::matrix;
use crate::symbols::{Side, Symbol};

/// Relative size of the coefficients of `f` beyond `N` tolerated without a warning.
pub const BAND_TOLERANCE: f64 = 1e-10;
/// Condition numbers above this are treated as singular by the direct path.
pub const SINGULAR_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Dense LU.
    Direct,
    /// Restarted GMRES without preconditioning.
    Gmres,
    /// Restarted GMRES, left-preconditioned by the parametrix matrix.
    PreconditionedGmres,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    /// Target for `‖(A+λ)û - f̂‖ / ‖f̂‖`.
    pub tol: f64,
    pub method: SolveMethod,
    pub parametrix_length: usize,
    pub max_iter: usize,
    pub restart: usize,
    /// Solve even when `λ` is below the estimated `λ₀`.
    pub allow_below_lambda0: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            method: SolveMethod::Direct,
            parametrix_length: 2,
            max_iter: 500,
            restart: 500,
            allow_below_lambda0: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: GridFunction,
    #[serde(skip)]
    pub coefficients: CoeffVector,
    /// `L²` norm of `T_σu + λu - f`, recomputed by direct summation on the grid of `f`.
    pub residual: f64,
    /// `‖(A+λ)û - f̂‖_{ℓ²}` on the truncation.
    pub projected_residual: f64,
    pub iterations: usize,
    pub preconditioned: bool,
    pub converged: bool,
    pub lambda: f64,
    pub lambda0: Option<f64>,
    /// Preconditioned residual norms after each Krylov step.
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Seeded band-limited right-hand side with coefficients damped by `exp(-k²/32)`.
pub fn smooth_random_rhs(seed: u64, n: usize, m: usize) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = CoeffVector::from_fn(n, |k| {
        let damp = (-((k * k) as f64) / 32.0).exp();
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp
    });
    inverse_transform(&coeffs, m)
}

/// `λ₀ = C₁` from the Gårding constants at `N/4, N/2, N` (each at least 8).
pub fn lambda0_estimate(s: &Symbol, m: f64, n: usize) -> Result<f64> {
    let rep = strong_m_ellipticity(s, 64, &DEFAULT_R_GRID);
    if !rep.is_elliptic {
        return Err(Error::NotElliptic("symbol is not strongly M-elliptic".into()));
    }
    let mut ns = vec![(n / 4).max(8), (n / 2).max(8), n.max(8)];
    ns.dedup();
    Ok(garding_constants(s, m, &ns)?.c1)
}

fn shifted_matrix(s: &Symbol, lambda: f64, n: usize) -> Result<DMatrix<Complex64>> {
    let mut a = matrix(s, n)?.into_matrix();
    for i in 0..a.nrows() {
        a[(i, i)] += Complex64::new(lambda, 0.0);
    }
    Ok(a)
}

fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let sv = a.clone().singular_values();
    let hi = sv.max();
    let lo = sv.min();
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `σ_min(matrix(σ, N) + λI)`.
pub fn uniqueness_check(s: &Symbol, lambda: f64, n: usize) -> Result<f64> {
    Ok(shifted_matrix(s, lambda, n)?.singular_values().min())
}

/// Parametrix matrix, with the modes it cuts off filled by the inverse diagonal.
fn preconditioner(s: &Symbol, a: &DMatrix<Complex64>, n: usize, length: usize) -> Result<DMatrix<Complex64>> {
    let p = parametrix_auto(s, length)?;
    let mut q = matrix(&p.symbol, n)?.into_matrix();
    let ni = n as i64;
    for k in -ni..=ni {
        let i = (k + ni) as usize;
        let gap = 1.0 - parametrix_cutoff(p.threshold, k);
        if gap > 0.0 {
            let d = a[(i, i)];
            let inv = if d.norm() > 0.0 { d.inv() } else { Complex64::new(1.0, 0.0) };
            q[(i, i)] += inv * gap;
        }
    }
    Ok(q)
}

struct Krylov {
    x: DVector<Complex64>,
    iterations: usize,
    history: Vec<f64>,
    converged: bool,
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if a.norm() == 0.0 {
        (0.0, Complex64::new(1.0, 0.0))
    } else {
        let c = a.norm() / r;
        let s = (a / a.norm()) * b.conj() / r;
        (c, s)
    }
}

/// Restarted GMRES for `P A x = P b`, stopping on the true residual `‖b - Ax‖ ≤ tol ‖b‖`.
fn gmres(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    p: Option<&DMatrix<Complex64>>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Krylov {
    let dim = b.len();
    let precond = |v: DVector<Complex64>| match p {
        Some(p) => p * v,
        None => v,
    };
    let b_norm = b.norm();
    let mut x = DVector::zeros(dim);
    let mut history = Vec::new();
    let mut iterations = 0;
    if b_norm == 0.0 {
        return Krylov {
            x,
            iterations: 1,
            history: vec![0.0],
            converged: true,
        };
    }
    let pb_norm = precond(b.clone()).norm();
    // Inner target in the preconditioned norm, tightened when the true residual lags.
    let mut inner_tol = 0.1 * tol * pb_norm;
    let restart = restart.clamp(1, dim);
    while iterations < max_iter {
        let r = precond(b - a * &x);
        let beta = r.norm();
        if beta == 0.0 {
            break;
        }
        let mut v: Vec<DVector<Complex64>> = vec![r / Complex64::new(beta, 0.0)];
        let mut h = DMatrix::<Complex64>::zeros(restart + 1, restart);
        let mut cs = vec![0.0; restart];
        let mut sn = vec![Complex64::new(0.0, 0.0); restart];
        let mut g = DVector::<Complex64>::zeros(restart + 1);
        g[0] = Complex64::new(beta, 0.0);
        let mut j = 0;
        while j < restart && iterations < max_iter {
            let mut w = precond(a * &v[j]);
            for (i, vi) in v.iter().enumerate() {
                let hij = vi.dotc(&w);
                h[(i, j)] = hij;
                w -= vi * hij;
            }
            let wn = w.norm();
            h[(j + 1, j)] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let (hi, hi1) = (h[(i, j)], h[(i + 1, j)]);
                h[(i, j)] = hi * cs[i] + sn[i] * hi1;
                h[(i + 1, j)] = -sn[i].conj() * hi + hi1 * cs[i];
            }
            let (c, s) = givens(h[(j, j)], h[(j + 1, j)]);
            cs[j] = c;
            sn[j] = s;
            h[(j, j)] = h[(j, j)] * c + s * h[(j + 1, j)];
            h[(j + 1, j)] = Complex64::new(0.0, 0.0);
            g[j + 1] = -s.conj() * g[j];
            g[j] *= c;
            iterations += 1;
            j += 1;
            history.push(g[j].norm());
            if g[j].norm() <= inner_tol || wn == 0.0 {
                break;
            }
            v.push(w / Complex64::new(wn, 0.0));
        }
        let mut y = DVector::<Complex64>::zeros(j);
        for i in (0..j).rev() {
            let mut acc = g[i];
            for l in i + 1..j {
                acc -= h[(i, l)] * y[l];
            }
            y[i] = acc / h[(i, i)];
        }
        for (i, yi) in y.iter().enumerate() {
            x += &v[i] * *yi;
        }
        if (b - a * &x).norm() <= tol * b_norm {
            return Krylov {
                x,
                iterations,
                history,
                converged: true,
            };
        }
        inner_tol *= 0.1;
    }
    let converged = (b - a * &x).norm() <= tol * b_norm;
    Krylov {
        x,
        iterations: iterations.max(1),
        history,
        converged,
    }
}

/// Solves `(T_σ + λ) u = f` in the span of `e^{ikx}`, `|k| ≤ N`.
///
/// The residual in the result is recomputed from `û` by summing the symbol
/// directly on the grid, independently of the matrix used to solve.
pub fn solve(s: &Symbol, lambda: f64, f: &GridFunction, n: usize, opts: &SolveOptions) -> Result<SolveResult> {
    if s.side() != Side::Torus {
        return Err(Error::Precondition("expected a symbol on the torus side".into()));
    }
    let mut warnings = Vec::new();
    let m = s.order() / 2.0;
    let lambda0 = match lambda0_estimate(s, m, n) {
        Ok(l0) => Some(l0),
        Err(e) if opts.allow_below_lambda0 => {
            warnings.push(format!("no lambda0 estimate: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(l0) = lambda0 {
        if lambda < l0 {
            if !opts.allow_below_lambda0 {
                return Err(Error::Precondition(format!(
                    "lambda = {lambda} is below the estimated lambda0 = {l0}"
                )));
            }
            warnings.push(format!("lambda = {lambda} is below the estimated lambda0 = {l0}"));
        }
    }
    let full = forward_transform(f, (f.len() - 1) / 2)?;
    let fh = full.resized(n);
    let tail = (full.l2_seq_norm().powi(2) - fh.l2_seq_norm().powi(2)).max(0.0).sqrt();
    if tail > BAND_TOLERANCE * full.l2_seq_norm() {
        warnings.push(format!("f has coefficient mass {tail:e} beyond |k| = {n}"));
    }
    let a = shifted_matrix(s, lambda, n)?;
    let b = DVector::from_column_slice(fh.as_slice());

    let (x, iterations, history, converged, preconditioned) = match opts.method {
        SolveMethod::Direct => {
            let cond = condition_number(&a);
            if cond > SINGULAR_CONDITION {
                return Err(Error::SolverFailure {
                    condition: cond,
                    reason: "system matrix is numerically singular".into(),
                });
            }
            let x = a.clone().lu().solve(&b).ok_or_else(|| Error::SolverFailure {
                condition: cond,
                reason: "LU factorization failed".into(),
            })?;
            (x, 1, Vec::new(), true, false)
        }
        SolveMethod::Gmres | SolveMethod::PreconditionedGmres => {
            let pre = opts.method == SolveMethod::PreconditionedGmres;
            let p = if pre {
                Some(preconditioner(s, &a, n, opts.parametrix_length)?)
            } else {
                None
            };
            let k = gmres(&a, &b, p.as_ref(), opts.tol, opts.restart, opts.max_iter);
            if !k.converged {
                warnings.push(format!("no convergence within {} iterations", opts.max_iter));
            }
            (k.x, k.iterations, k.history, k.converged, pre)
        }
    };
    let projected_residual = (&b - &a * &x).norm();
    let coefficients = CoeffVector::from_vec(n, x.iter().copied().collect())?;
    let u = inverse_transform(&coefficients, f.len())?;
    let tu = synthesis_oracle(s, &coefficients, f.len())?;
    let r = tu
        .axpy(Complex64::new(lambda, 0.0), &u)?
        .axpy(Complex64::new(-1.0, 0.0), f)?;
    Ok(SolveResult {
        u,
        coefficients,
        residual: l2_norm(&r),
        projected_residual,
        iterations,
        preconditioned,
        converged,
        lambda,
        lambda0,
        history,
        warnings,
    })
}
