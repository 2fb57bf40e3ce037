use thiserror::Error;

/// Errors raised by the algebra, orbit and form constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error("sampling error: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
