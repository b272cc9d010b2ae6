//! Toroidal and lattice quantization: `T_σ` as an action and as a Galerkin matrix.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{bin, dft, forward_transform, grid_point, CoeffVector, GridFunction};
use crate::symbols::{Side, Symbol, SymbolClass};
use crate::weights::WeightFunction;

/// Relative coefficient mass below which x-frequencies count as absent.
pub const BANDWIDTH_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A `(2N+1) × (2N+1)` matrix acting on frequencies `-N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(n: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = 2 * n + 1;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Precondition("matrix has non-finite entries".into()));
        }
        Ok(Self { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            matrix: DMatrix::identity(2 * n + 1, 2 * n + 1),
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(i64, i64) -> Complex64) -> Self {
        let ni = n as i64;
        Self {
            n,
            matrix: DMatrix::from_fn(2 * n + 1, 2 * n + 1, |r, c| f(r as i64 - ni, c as i64 - ni)),
        }
    }

    pub fn radius(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Entry at frequencies `(k, l)`.
    pub fn entry(&self, k: i64, l: i64) -> Complex64 {
        let ni = self.n as i64;
        self.matrix[((k + ni) as usize, (l + ni) as usize)]
    }

    fn same_size(&self, other: &DenseOperator) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: 2 * self.n + 1,
                actual: 2 * other.n + 1,
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_size(other)?;
        Ok(Self {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_size(other)?;
        Ok(Self {
            n: self.n,
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseOperator {
        Self {
            n: self.n,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Matrix-vector product on coefficient vectors of radius `N`.
    pub fn apply_coeffs(&self, f: &CoeffVector) -> Result<CoeffVector> {
        if f.radius() != self.n {
            return Err(Error::SizeMismatch {
                expected: 2 * self.n + 1,
                actual: 2 * f.radius() + 1,
            });
        }
        let v = nalgebra::DVector::from_column_slice(f.as_slice());
        let out = &self.matrix * v;
        CoeffVector::from_vec(self.n, out.as_slice().to_vec())
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.matrix.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Rows `(k, l, re, im)`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "l", "re", "im"])?;
        let ni = self.n as i64;
        for k in -ni..=ni {
            for l in -ni..=ni {
                let c = self.entry(k, l);
                wtr.serialize((k, l, c.re, c.im))?;
            }
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for row in rdr.deserialize() {
            let (k, l, re, im): (i64, i64, f64, f64) = row?;
            rows.push((k, l, Complex64::new(re, im)));
        }
        let n = rows
            .iter()
            .map(|(k, l, _)| k.unsigned_abs().max(l.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0);
        let ni = n as i64;
        let mut m = DMatrix::zeros(2 * n + 1, 2 * n + 1);
        for (k, l, c) in rows {
            m[((k + ni) as usize, (l + ni) as usize)] = c;
        }
        Self::new(n, m)
    }
}

fn require_torus(s: &Symbol) -> Result<()> {
    if s.side() != Side::Torus {
        return Err(Error::Precondition("expected a symbol on the torus side".into()));
    }
    Ok(())
}

fn require_lattice(s: &Symbol) -> Result<()> {
    if s.side() != Side::Lattice {
        return Err(Error::Precondition("expected a symbol on the lattice side".into()));
    }
    Ok(())
}

/// `x ↦ Σ_{|k|≤N} e^{ikx} σ(x,k) f̂(k)` on the grid of `f`. Requires `M ≥ 2N+1`.
pub fn apply(s: &Symbol, f: &GridFunction, n: usize) -> Result<GridFunction> {
    require_torus(s)?;
    let m = f.len();
    let fh = forward_transform(f, n)?;
    let mut out = vec![ZERO; m];
    for (k, c) in fh.iter() {
        if c == ZERO {
            continue;
        }
        let col = s.column(k, m);
        for (j, (o, sv)) in out.iter_mut().zip(col).enumerate() {
            *o += Complex64::from_polar(1.0, k as f64 * grid_point(j, m)) * sv * c;
        }
    }
    GridFunction::new(out)
}

/// Default quadrature resolution for [`matrix`]: resolves `|k - l| ≤ 2N` exactly.
pub fn default_resolution(n: usize) -> usize {
    4 * n + 4
}

/// Galerkin matrix with entries `σ̂(k-l, l)`.
pub fn matrix(s: &Symbol, n: usize) -> Result<DenseOperator> {
    matrix_with_resolution(s, n, default_resolution(n))
}

/// Galerkin matrix with the x-coefficients computed from `m` samples per column.
/// For `m < 4N+1` the coefficients are the (aliased) `m`-point quadratures.
pub fn matrix_with_resolution(s: &Symbol, n: usize, m: usize) -> Result<DenseOperator> {
    require_torus(s)?;
    if m < 2 * n + 1 {
        return Err(Error::Aliasing {
            grid: m,
            required: 2 * n + 1,
        });
    }
    let ni = n as i64;
    let dim = 2 * n + 1;
    let mut mat = DMatrix::zeros(dim, dim);
    for l in -ni..=ni {
        let spec = column_spectrum(&s.column(l, m));
        for k in -ni..=ni {
            mat[((k + ni) as usize, (l + ni) as usize)] = spec[bin(k - l, m)];
        }
    }
    DenseOperator::new(n, mat)
}

/// Normalized DFT, exact for constant columns.
fn column_spectrum(col: &[Complex64]) -> Vec<Complex64> {
    if col.iter().all(|c| *c == col[0]) {
        let mut spec = vec![ZERO; col.len()];
        spec[0] = col[0];
        spec
    } else {
        dft(col)
    }
}

/// Smallest `B` such that, for every column `|l| ≤ N`, the x-coefficients beyond
/// `|j| > B` carry less than [`BANDWIDTH_TOLERANCE`] of the column's mass.
pub fn x_bandwidth(s: &Symbol, n: usize, m: usize) -> usize {
    let half = (m - 1) / 2;
    let ni = n as i64;
    let mut b = 0;
    for l in -ni..=ni {
        let spec = column_spectrum(&s.column(l, m));
        let mass: Vec<f64> = (0..=half)
            .map(|j| {
                let j = j as i64;
                if j == 0 {
                    spec[0].norm()
                } else {
                    spec[bin(j, m)].norm() + spec[bin(-j, m)].norm()
                }
            })
            .collect();
        let total: f64 = mass.iter().sum();
        if total == 0.0 {
            continue;
        }
        let mut tail = 0.0;
        let mut bl = half;
        for j in (0..=half).rev() {
            if tail + mass[j] >= BANDWIDTH_TOLERANCE * total {
                bl = j;
                break;
            }
            tail += mass[j];
        }
        b = b.max(bl);
    }
    b
}

/// `(T_σ f)(n) = (1/2π) ∫ e^{inx} σ(n,x) Σ_m f(m) e^{-imx} dx`, by `m`-point quadrature.
pub fn lattice_apply(s: &Symbol, f: &CoeffVector, m: usize) -> Result<CoeffVector> {
    require_lattice(s)?;
    let n = f.radius();
    if m < 2 * n + 1 {
        return Err(Error::Aliasing {
            grid: m,
            required: 2 * n + 1,
        });
    }
    let ff: Vec<Complex64> = (0..m)
        .map(|j| {
            let x = grid_point(j, m);
            f.iter()
                .map(|(p, c)| c * Complex64::from_polar(1.0, -(p as f64) * x))
                .sum()
        })
        .collect();
    let ni = n as i64;
    let out = (-ni..=ni)
        .map(|p| {
            let col = s.column(p, m);
            (0..m)
                .map(|j| Complex64::from_polar(1.0, p as f64 * grid_point(j, m)) * col[j] * ff[j])
                .sum::<Complex64>()
                / m as f64
        })
        .collect();
    CoeffVector::from_vec(n, out)
}

/// Matrix of [`lattice_apply`] on `|n| ≤ N`: entry `(p, q) = (1/M) Σ_j e^{i(p-q)x_j} σ(p, x_j)`.
pub fn lattice_matrix(s: &Symbol, n: usize, m: usize) -> Result<DenseOperator> {
    require_lattice(s)?;
    if m < 2 * n + 1 {
        return Err(Error::Aliasing {
            grid: m,
            required: 2 * n + 1,
        });
    }
    let ni = n as i64;
    let cols: Vec<Vec<Complex64>> = (-ni..=ni).map(|p| s.column(p, m)).collect();
    Ok(DenseOperator::from_fn(n, |p, q| {
        let col = &cols[(p + ni) as usize];
        (0..m)
            .map(|j| Complex64::from_polar(1.0, (p - q) as f64 * grid_point(j, m)) * col[j])
            .sum::<Complex64>()
            / m as f64
    }))
}

/// `τ(x, k) = conj σ(-k, x)`.
pub fn duality_transfer(s: &Symbol) -> Result<Symbol> {
    require_lattice(s)?;
    Ok(s.dual())
}

/// Max entry-wise difference between the lattice matrix of `σ` and
/// `F_ℤ^{-1} T_τ^* F_ℤ` built from the transferred symbol.
pub fn duality_identity_check(s: &Symbol, n: usize, m: usize) -> Result<f64> {
    let lhs = lattice_matrix(s, n, m)?;
    let tau = duality_transfer(s)?;
    let at = matrix_with_resolution(&tau, n, m)?;
    // F_ℤ reflects frequencies; its unitary scaling cancels between F_ℤ^{-1} and F_ℤ.
    let rhs = DenseOperator::from_fn(n, |p, q| at.entry(-q, -p).conj());
    Ok(lhs.sub(&rhs)?.max_abs())
}

/// Symbol `Λ(k)^{-s}` of the Bessel potential `J_s`.
pub fn bessel_potential(s: f64, w: WeightFunction) -> Result<Symbol> {
    let mu = w.mu();
    let rho = if mu > 0.0 { 1.0 / mu } else { 1.0 };
    let wc = w.clone();
    Symbol::multiplier(SymbolClass::new(-s, rho, w), move |k| {
        Complex64::new(wc.pow(k, -s), 0.0)
    })
}

/// Conjugate transpose.
pub fn adjoint_matrix(a: &DenseOperator) -> DenseOperator {
    a.adjoint()
}

/// One point of an operator-norm trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct NormRecord {
    pub N: usize,
    pub norm: f64,
}

/// `‖A‖_{H^s → H^{s-m}}` of the truncation: largest singular value of `G_{s-m} A G_s^{-1}`.
pub fn weighted_operator_norm(a: &DenseOperator, s: f64, order: f64, w: &WeightFunction) -> f64 {
    let scaled = DenseOperator::from_fn(a.radius(), |k, l| {
        a.entry(k, l) * w.pow(k, s - order) / w.pow(l, s)
    });
    scaled.singular_values()[0]
}

/// Weighted operator norms of `matrix(σ, N)` for each `N`.
pub fn boundedness_trend(sym: &Symbol, s: f64, ns: &[usize]) -> Result<Vec<NormRecord>> {
    ns.iter()
        .map(|&n| {
            let a = matrix(sym, n)?;
            Ok(NormRecord {
                N: n,
                norm: weighted_operator_norm(&a, s, sym.order(), sym.weight()),
            })
        })
        .collect()
}
