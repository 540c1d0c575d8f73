use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CwError {
    /// An argument is outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Exact integer arithmetic left the representable range.
    #[error("overflow in exact arithmetic: {0}")]
    Overflow(String),

    /// The operation declines to run at this size (e.g. brute force above its guard).
    #[error("refused: {0}")]
    Refused(String),

    /// A textual argument (transform word, fraction, grid) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Not enough usable data points to fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Two routes that must agree did not.
    #[error("invariant breach: {0}")]
    InvariantBreach(String),
}

pub type Result<T> = std::result::Result<T, CwError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CwError {
    CwError::InvalidInput(msg.into())
}
