use phase_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilneError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Milne fixed point not reached: residual {0:e}")]
    Convergence(f64),
    #[error("singular Milne system")]
    Singular,
    #[error("extension datum violates null flux at t = {time} ({side} wall): flux {flux:e}")]
    Incompatible { time: f64, side: &'static str, flux: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}
