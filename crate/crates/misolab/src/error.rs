//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by solvers, samplers and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A fixed-point or search iteration exhausted its budget.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A matrix argument violates a model invariant.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A scalar argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or out-of-range inputs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The estimated channel Gram matrix is too ill-conditioned to invert.
    #[error("singular channel: condition number {cond:.3e} exceeds {limit:.1e}")]
    SingularChannel { cond: f64, limit: f64 },

    /// The precoder power normalization underflowed (channel numerically zero).
    #[error("singular normalization: trace term {trace:.3e}")]
    SingularNormalization { trace: f64 },

    /// A config file failed validation; `field` is the offending path.
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
