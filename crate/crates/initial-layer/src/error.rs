use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("source does not decay: tail ratio {ratio} over the last stretch before tau_max = {tau_max}")]
    Divergence { ratio: f64, tau_max: f64 },
    #[error("adaptive quadrature on [{a}, {b}] missed tolerance: error estimate {estimate:e}")]
    Quadrature { a: f64, b: f64, estimate: f64 },
}
