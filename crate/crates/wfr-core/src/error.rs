//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Every particle is dead or carries zero weight; no estimator is defined.
    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),
    /// No particle has positive weight excess; the jump kernel is undefined.
    #[error("no jump target: all weight excesses are non-positive")]
    NoJumpTarget,
    #[error("step size too large: {0}")]
    StepSize(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// Input density leaves the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
