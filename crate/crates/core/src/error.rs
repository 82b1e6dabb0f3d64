use thiserror::Error;

/// Errors raised by the engine. Mathematical failures that are ordinary
/// outcomes (an unsolvable system, a failed axiom check) are values, not
/// errors; these variants signal misuse or caps that are too small.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("truncation exceeded while building {construction}: {detail}")]
    TruncationExceeded { construction: String, detail: String },
    #[error("sequence is not exact: {0}")]
    NotExact(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("axiom check failed: {0}")]
    Axiom(String),
    #[error("module is not free: {0}")]
    NotFreeModule(String),
    #[error("induced structure on quotient is ill-defined: {0}")]
    IllDefinedQuotient(String),
    #[error("no witness found: {0}")]
    NoWitness(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn truncation(construction: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::TruncationExceeded {
            construction: construction.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
