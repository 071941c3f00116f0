//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong matrix shape, duplicate or unknown labels,
    /// mismatched label sets between operands.
    #[error("structural: {0}")]
    Structural(String),

    /// Well-formed input outside an operation's domain, e.g. an empty
    /// subset, a non-ultrametric matrix where one is required, or a
    /// degenerate scale grid.
    #[error("domain: {0}")]
    Domain(String),

    /// Instance too large for an exact search or an exact representation.
    #[error("capacity: {0}")]
    Capacity(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
