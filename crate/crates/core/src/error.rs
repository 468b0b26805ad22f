use std::fmt;

/// Errors surfaced by the measure-flow machinery and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects were defined on ground sets of different sizes.
    DimensionMismatch { expected: usize, got: usize },
    /// A weight vector failed the probability-simplex checks.
    InvalidDistribution(String),
    /// A parameter was outside its admissible range.
    Domain(String),
    /// Discounted-value evaluation was requested without a reward bound
    /// or an explicit truncation horizon.
    UnboundedReward,
    /// An iterative solver exhausted its iteration budget.
    NonConvergence { iterations: usize, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::UnboundedReward => write!(
                f,
                "reward is unbounded: declare a reward bound or pass an explicit horizon"
            ),
            Error::NonConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
