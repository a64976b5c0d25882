use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("model regime error: {0}")]
    ModelRegime(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("unit mismatch: {0}")]
    UnitMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
