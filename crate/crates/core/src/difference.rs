//! Forward and backward differences on functions of an integer variable.

use std::ops::{Add, Mul, Sub};

/// Binomial coefficient `C(n, j)` as a float.
pub fn binomial(n: u32, j: u32) -> f64 {
    if j > n {
        return 0.0;
    }
    let j = j.min(n - j);
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Δ^α f(k) = Σ_{j=0}^{α} (-1)^{α-j} C(α,j) f(k+j)`.
pub fn forward<T>(f: impl Fn(i64) -> T, alpha: u32, k: i64) -> T
where
    T: Add<Output = T> + Mul<f64, Output = T>,
{
    let mut acc = f(k) * sign(alpha) * binomial(alpha, 0);
    for j in 1..=alpha {
        acc = acc + f(k + j as i64) * (sign(alpha - j) * binomial(alpha, j));
    }
    acc
}

/// `Δ̄^α f(k) = Σ_{j=0}^{α} (-1)^j C(α,j) f(k-j)`.
pub fn backward<T>(f: impl Fn(i64) -> T, alpha: u32, k: i64) -> T
where
    T: Add<Output = T> + Mul<f64, Output = T>,
{
    let mut acc = f(k);
    for j in 1..=alpha {
        acc = acc + f(k - j as i64) * (sign(j) * binomial(alpha, j));
    }
    acc
}

/// One forward step applied `alpha` times, used to cross-check [`forward`].
pub fn forward_iterated<T>(f: &dyn Fn(i64) -> T, alpha: u32, k: i64) -> T
where
    T: Sub<Output = T>,
{
    if alpha == 0 {
        f(k)
    } else {
        forward_iterated(f, alpha - 1, k + 1) - forward_iterated(f, alpha - 1, k)
    }
}

#[inline]
fn sign(p: u32) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Falling factorial `j (j-1) ... (j-α+1)`.
pub fn falling_factorial(j: f64, alpha: u32) -> f64 {
    (0..alpha).fold(1.0, |acc, r| acc * (j - r as f64))
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
