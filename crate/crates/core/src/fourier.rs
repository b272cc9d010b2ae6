//! Discrete Fourier conventions on the circle and the lattice.
//!
//! The circle is parameterized as `[0, 2π)` and sampled at `x_j = 2πj/M`.
//! Coefficients follow
//!
//! ```text
//! f̂(k) = (1/2π) ∫ e^{-ikx} f(x) dx ≈ (1/M) Σ_j f(x_j) e^{-ik x_j}
//! f(x)  = Σ_k f̂(k) e^{ikx}
//! ```
//!
//! so that the quantization of the constant symbol 1 is the identity.
//! L² norms use Lebesgue measure on `[0, 2π)`: `‖e^{ikx}‖ = √(2π)`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    })
}

/// Grid point `x_j = 2πj/M`.
#[inline]
pub fn grid_point(j: usize, m: usize) -> f64 {
    2.0 * PI * j as f64 / m as f64
}

/// Normalized DFT of a sample vector: entry `q` holds `(1/M) Σ_j s_j e^{-2πi jq/M}`.
pub(crate) fn dft(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    let mut buf = samples.to_vec();
    plan(m, false).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Unnormalized inverse DFT: entry `j` holds `Σ_q c_q e^{2πi jq/M}`.
pub(crate) fn idft(mut bins: Vec<Complex64>) -> Vec<Complex64> {
    let m = bins.len();
    plan(m, true).process(&mut bins);
    bins
}

#[inline]
pub(crate) fn bin(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// A periodic function sampled on the uniform grid `x_j = 2πj/M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::SizeMismatch {
                expected: 1,
                actual: 0,
            });
        }
        Ok(Self { samples })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            samples: (0..m).map(|j| f(grid_point(j, m))).collect(),
        }
    }

    /// Grid size `M`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn x(&self, j: usize) -> f64 {
        grid_point(j, self.len())
    }

    /// Pointwise `self + alpha * other`.
    pub fn axpy(&self, alpha: Complex64, other: &GridFunction) -> Result<GridFunction> {
        if other.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(GridFunction {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        })
    }

    /// Rows `(x_j, re, im)`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["x", "re", "im"])?;
        for (j, s) in self.samples.iter().enumerate() {
            wtr.serialize((self.x(j), s.re, s.im))?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let (_x, re, im): (f64, f64, f64) = row?;
            samples.push(Complex64::new(re, im));
        }
        GridFunction::new(samples)
    }
}

/// Fourier coefficients (or a lattice sequence) on the symmetric window `|k| ≤ N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    pub fn from_vec(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * n + 1 {
            return Err(Error::SizeMismatch {
                expected: 2 * n + 1,
                actual: coeffs.len(),
            });
        }
        Ok(Self { n, coeffs })
    }

    pub fn from_fn(n: usize, f: impl FnMut(i64) -> Complex64) -> Self {
        let n_i = n as i64;
        Self {
            n,
            coeffs: (-n_i..=n_i).map(f).collect(),
        }
    }

    /// Unit vector at frequency `k`.
    pub fn delta(n: usize, k: i64) -> Self {
        Self::from_fn(n, |j| {
            if j == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Truncation radius `N`.
    pub fn radius(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at frequency `k`; zero outside the window.
    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.n as i64) as usize]
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.n, "k={k} outside |k|<={}", self.n);
        self.coeffs[(k + self.n as i64) as usize] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 - n, *c))
    }

    /// `(2π Σ |c_k|²)^{1/2}`, the L² norm of the synthesized function.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Plain ℓ² norm of the sequence.
    pub fn l2_seq_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Zero-extends or truncates to radius `n`.
    pub fn resized(&self, n: usize) -> Self {
        Self::from_fn(n, |k| self.get(k))
    }

    /// Rows `(k, re, im)`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "re", "im"])?;
        for (k, c) in self.iter() {
            wtr.serialize((k, c.re, c.im))?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for row in rdr.deserialize() {
            let (k, re, im): (i64, f64, f64) = row?;
            rows.push((k, Complex64::new(re, im)));
        }
        let n = rows.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut out = Self::zeros(n);
        for (k, c) in rows {
            out.set(k, c);
        }
        Ok(out)
    }
}

fn check_grid(m: usize, n: usize) -> Result<()> {
    if m < 2 * n + 1 {
        Err(Error::Aliasing {
            grid: m,
            required: 2 * n + 1,
        })
    } else {
        Ok(())
    }
}

/// Coefficients of `f` on `|k| ≤ N`. Requires `M ≥ 2N+1`.
pub fn forward_transform(f: &GridFunction, n: usize) -> Result<CoeffVector> {
    check_grid(f.len(), n)?;
    Ok(coefficients_of(f.samples(), n))
}

/// Coefficients of raw samples on `|k| ≤ n`; caller guarantees `samples.len() ≥ 2n+1`.
pub(crate) fn coefficients_of(samples: &[Complex64], n: usize) -> CoeffVector {
    let m = samples.len();
    let spec = dft(samples);
    CoeffVector::from_fn(n, |k| spec[bin(k, m)])
}

/// Synthesizes `Σ_{|k|≤N} c(k) e^{ikx}` on an `M`-point grid. Requires `M ≥ 2N+1`.
pub fn inverse_transform(c: &CoeffVector, m: usize) -> Result<GridFunction> {
    check_grid(m, c.radius())?;
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    for (k, v) in c.iter() {
        bins[bin(k, m)] = v;
    }
    Ok(GridFunction { samples: idft(bins) })
}

/// `(2π/M Σ_j |f(x_j)|²)^{1/2}`.
pub fn l2_norm(f: &GridFunction) -> f64 {
    let m = f.len() as f64;
    (2.0 * PI / m * f.samples().iter().map(|s| s.norm_sqr()).sum::<f64>()).sqrt()
}

/// `∂_x^β` by multiplying the coefficients on `|k| ≤ (M-1)/2` by `(ik)^β`.
///
/// The Nyquist mode of an even grid is discarded.
pub fn spectral_derivative(f: &GridFunction, order: u32) -> GridFunction {
    GridFunction {
        samples: derivative_samples(f.samples(), order),
    }
}

pub(crate) fn derivative_samples(samples: &[Complex64], order: u32) -> Vec<Complex64> {
    if order == 0 {
        return samples.to_vec();
    }
    let m = samples.len();
    if samples.iter().all(|s| *s == samples[0]) {
        return vec![Complex64::new(0.0, 0.0); m];
    }
    multiply_coefficients(samples, |k| Complex64::new(0.0, k as f64).powu(order))
}

/// Multiplies the resolved coefficients (`|k| ≤ (M-1)/2`) by `mult(k)` and resynthesizes.
pub(crate) fn multiply_coefficients(
    samples: &[Complex64],
    mult: impl Fn(i64) -> Complex64,
) -> Vec<Complex64> {
    let m = samples.len();
    let n = ((m - 1) / 2) as i64;
    let spec = dft(samples);
    // Roundoff-level coefficients would be amplified by growing multipliers.
    let floor = 4.0 * f64::EPSILON * spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut bins = vec![Complex64::new(0.0, 0.0); m];
    for k in -n..=n {
        let b = bin(k, m);
        if spec[b].norm() > floor {
            bins[b] = spec[b] * mult(k);
        }
    }
    idft(bins)
}

/// Unitary lattice-to-circle transform `(F_ℤ f)(x) = (2π)^{-1/2} Σ_n f(n) e^{-inx}`.
///
/// With this scaling `‖F_ℤ f‖_{L²(𝕋)} = ‖f‖_{ℓ²}`.
pub fn lattice_fourier(f: &CoeffVector, m: usize) -> Result<GridFunction> {
    check_grid(m, f.radius())?;
    let scale = (2.0 * PI).sqrt().recip();
    let reflected = CoeffVector::from_fn(f.radius(), |k| f.get(-k) * scale);
    inverse_transform(&reflected, m)
}

/// Inverse of [`lattice_fourier`] on the window `|n| ≤ N`.
pub fn lattice_fourier_inverse(g: &GridFunction, n: usize) -> Result<CoeffVector> {
    let c = forward_transform(g, n)?;
    let scale = (2.0 * PI).sqrt();
    Ok(CoeffVector::from_fn(n, |k| c.get(-k) * scale))
}
