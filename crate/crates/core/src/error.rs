use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability table or observation failed validation.
    #[error("validation error: {0}")]
    Validation(String),
    /// An argument was out of its allowed domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A computation would exceed a configured size budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// An operation precondition did not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Rejection sampling failed to produce a point.
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
