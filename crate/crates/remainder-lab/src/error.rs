use diffusion_hierarchy::HierarchyError;
use phase_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("Neumann problem is not solvable: source integral {integral:.3e}")]
    Solvability { integral: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}
