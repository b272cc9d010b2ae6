//! Weighted pseudo-differential operators on the circle and the integer lattice.

pub mod builtin;
pub mod calculus;
pub mod diagnostics;
pub mod difference;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod oracle;
pub mod quantization;
pub mod solver;
pub mod symbols;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
