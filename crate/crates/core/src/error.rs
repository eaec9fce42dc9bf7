use thiserror::Error;

/// Errors produced by the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("no feature found: {0}")]
    NoFeature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
