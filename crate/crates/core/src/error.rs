use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mixed field contexts: Q(sqrt {0}) and Q(sqrt {1})")]
    MixedField(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("infinite length: an endpoint lies on the absolute")]
    InfiniteLength,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("non-integrable configuration: {0}")]
    NonIntegrable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numeric contract failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
