use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not a perfect square")]
    NotASquare(u64),

    #[error("resource limit exceeded: |D| = {size} exceeds the bound {bound}")]
    ResourceLimit { size: usize, bound: usize },

    #[error("series has no terms below the requested truncation")]
    EmptySeries,

    #[error("cannot compare series: {0}")]
    Incomparable(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A structural statement that must hold was found to fail.
    #[error("violation: {0}")]
    Violation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
