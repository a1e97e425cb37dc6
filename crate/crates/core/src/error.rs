use thiserror::Error;

/// Errors raised by the clustering primitives and samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violates the mathematical domain of an operation
    /// (label out of range, non-positive part, length mismatch, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration is unusable as given (search space too large,
    /// too few chains for R-hat, ...).
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
