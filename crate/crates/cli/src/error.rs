use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Hypothesis(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<psido_core::Error> for CliError {
    fn from(e: psido_core::Error) -> Self {
        use psido_core::Error as E;
        match e {
            E::Aliasing { .. } | E::SizeMismatch { .. } | E::InvalidWeight(_) | E::Csv(_) | E::OutOfWindow { .. } => {
                CliError::Config(e.to_string())
            }
            E::Precondition(_)
            | E::SingularSymbol { .. }
            | E::NotElliptic(_)
            | E::GardingFails(_)
            | E::NotDiagonal { .. } => CliError::Hypothesis(e.to_string()),
            E::SolverFailure { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
