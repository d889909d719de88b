use initial_layer::LayerError;
use milne_layer::MilneError;
use phase_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),
    #[error("{condition} violated at the {side} wall: {detail}")]
    Incompatible { condition: &'static str, side: &'static str, detail: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Milne(#[from] MilneError),
    #[error(transparent)]
    Layer(#[from] LayerError),
}
