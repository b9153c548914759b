use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),
    /// A position or range falls outside the text.
    #[error("bounds error: {0}")]
    Bounds(String),
    /// A structure is not in the state an operation requires.
    #[error("state error: {0}")]
    State(String),
    /// Serialized input could not be parsed.
    #[error("format error: {0}")]
    Format(String),
    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
