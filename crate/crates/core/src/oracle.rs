//! Brute-force reference implementations.
//!
//! Nothing here goes through an FFT: every quantity is a direct quadrature sum,
//! so agreement with the fast paths is a genuine cross-check.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{grid_point, CoeffVector, GridFunction};
use crate::quantization::{default_resolution, DenseOperator};
use crate::symbols::{Side, Symbol};

/// Settings shared by oracle runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    pub n: usize,
    pub m: usize,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n: 32,
            m: 128,
            tolerance: 1e-10,
        }
    }
}

/// `(1/2π) Σ_{|k|≤N} ∫ e^{ik(x-y)} σ(x,k) f(y) dy` by `M`-point trapezoid rule in `y`,
/// evaluated at the same `M` grid points in `x`.
pub fn quantization_oracle(s: &Symbol, f: &GridFunction, n: usize, m: usize) -> Result<GridFunction> {
    if s.side() != Side::Torus {
        return Err(Error::Precondition("expected a symbol on the torus side".into()));
    }
    if f.len() != m {
        return Err(Error::SizeMismatch {
            expected: m,
            actual: f.len(),
        });
    }
    let ni = n as i64;
    let cols: Vec<Vec<Complex64>> = (-ni..=ni).map(|k| s.column(k, m)).collect();
    let fy = f.samples();
    let out = (0..m)
        .map(|i| {
            let x = grid_point(i, m);
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, k) in (-ni..=ni).enumerate() {
                let sig = cols[idx][i];
                for (j, fj) in fy.iter().enumerate() {
                    let y = grid_point(j, m);
                    acc += Complex64::from_polar(1.0, k as f64 * (x - y)) * sig * fj;
                }
            }
            acc / m as f64
        })
        .collect();
    GridFunction::new(out)
}

/// `Σ_{|k|≤N} e^{ikx_j} σ(x_j, k) c(k)` at the `M` grid points, summed directly.
pub fn synthesis_oracle(s: &Symbol, c: &CoeffVector, m: usize) -> Result<GridFunction> {
    if s.side() != Side::Torus {
        return Err(Error::Precondition("expected a symbol on the torus side".into()));
    }
    let cols: Vec<(i64, Complex64, Vec<Complex64>)> = c.iter().map(|(k, v)| (k, v, s.column(k, m))).collect();
    let out = (0..m)
        .map(|j| {
            let x = grid_point(j, m);
            cols.iter()
                .map(|(k, v, col)| Complex64::from_polar(1.0, *k as f64 * x) * col[j] * v)
                .sum()
        })
        .collect();
    GridFunction::new(out)
}

/// Galerkin matrix by direct quadrature: `(1/M) Σ_j e^{-i(k-l)x_j} σ(x_j, l)`.
pub fn galerkin_matrix_oracle(s: &Symbol, n: usize, m: usize) -> DenseOperator {
    let ni = n as i64;
    let cols: Vec<Vec<Complex64>> = (-ni..=ni).map(|l| s.column(l, m)).collect();
    DenseOperator::from_fn(n, |k, l| {
        let col = &cols[(l + ni) as usize];
        (0..m)
            .map(|j| Complex64::from_polar(1.0, -((k - l) as f64) * grid_point(j, m)) * col[j])
            .sum::<Complex64>()
            / m as f64
    })
}

/// Product of the two Galerkin matrices, each built by direct quadrature.
pub fn composition_oracle(s: &Symbol, t: &Symbol, n: usize) -> Result<DenseOperator> {
    let m = default_resolution(n);
    galerkin_matrix_oracle(s, n, m).mul(&galerkin_matrix_oracle(t, n, m))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalGohberg {
    /// `max_{K0 ≤ |k| ≤ N} |σ(k)|`.
    pub d: f64,
    /// `|σ(k)|` for `|k| ≤ N`, sorted decreasingly.
    pub singular_values: Vec<f64>,
}

/// Exact Gohberg data of an x-independent symbol on the window `|k| ≤ N`.
pub fn diagonal_gohberg_oracle(s: &Symbol, k0: i64, n: usize) -> Result<DiagonalGohberg> {
    let ni = n as i64;
    let m = 16;
    let mut variation = 0.0f64;
    let mut values = Vec::with_capacity(2 * n + 1);
    for k in -ni..=ni {
        let col = s.column(k, m);
        variation = col
            .iter()
            .map(|c| (c - col[0]).norm())
            .fold(variation, f64::max);
        values.push((k, col[0].norm()));
    }
    if variation > 0.0 {
        return Err(Error::NotDiagonal { variation });
    }
    let d = values
        .iter()
        .filter(|(k, _)| k.abs() >= k0)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let mut singular_values: Vec<f64> = values.into_iter().map(|(_, v)| v).collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(DiagonalGohberg { d, singular_values })
}
