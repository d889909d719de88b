use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}
