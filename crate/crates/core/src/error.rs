use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands live in different rings, fields or truncations.
    #[error("structural mismatch: {0}")]
    Structural(String),
    /// A value lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Error {
        Error::Structural(msg.into())
    }
}
