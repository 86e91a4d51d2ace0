//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation was requested outside the exponent regime it is defined for.
    #[error("regime error: {0}")]
    Regime(String),

    /// No sign change of the target function was found on the search grid.
    #[error("bracket not found: {0}")]
    BracketNotFound(String),

    /// The two-critical-point condition fails for the given scalar profile.
    #[error("condition violated: {0}")]
    ConditionViolated(String),

    /// The envelope h has no positive zeros (the small-mu window is closed).
    #[error("roots not found: {0}")]
    RootsNotFound(String),

    /// An iterative method hit its iteration cap before reaching tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
