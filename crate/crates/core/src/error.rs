use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input has the wrong shape: bad lengths, malformed sequences, unbalanced problems.
    #[error("structural error: {0}")]
    Structural(String),
    /// Input is well-formed but violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Requested instance exceeds the enumeration bound.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// Something that must hold by construction did not.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
