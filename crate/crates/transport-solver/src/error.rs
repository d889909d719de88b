use phase_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("source iteration did not converge at t = {time}: residual {residual:e} after {iterations} iterations")]
    Convergence { time: f64, residual: f64, iterations: usize },
    #[error("boundary datum violates the null-flux compatibility at t = {time} ({side} wall): flux {flux:e}")]
    Incompatible { time: f64, side: &'static str, flux: f64 },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}
