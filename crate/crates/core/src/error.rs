use thiserror::Error;

/// Errors raised by the operator toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid of {grid} points cannot resolve {required} frequencies without aliasing")]
    Aliasing { grid: usize, required: usize },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("frequency {k} is outside the tabulated window [{lo}, {hi}]")]
    OutOfWindow { k: i64, lo: i64, hi: i64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("symbol is singular at k={k} (|sigma| = {value:e})")]
    SingularSymbol { k: i64, value: f64 },

    #[error("symbol is not elliptic: {0}")]
    NotElliptic(String),

    #[error("Garding inequality could not be established: {0}")]
    GardingFails(String),

    #[error("solver failure (condition estimate {condition:e}): {reason}")]
    SolverFailure { condition: f64, reason: String },

    #[error("symbol is not x-independent (max column variation {variation:e})")]
    NotDiagonal { variation: f64 },

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
