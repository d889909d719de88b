//! Backward-Euler discrete-ordinates solver for
//! `ε ∂t u + μ ∂x u + ε⁻¹ (u − ū) = 0` on a slab, with in-flow, diffuse
//! or specular walls.
//!
//! Each implicit step is closed by source iteration: upwind sweeps per
//! direction with the scalar average (and reflected wall values) lagged
//! until the update falls below the tolerance.

mod bc;
mod error;
mod solver;

pub use bc::{BoundaryCondition, BoundaryFn, BoundaryKind};
pub use error::TransportError;
pub use solver::{boundary_flux, solve, step, InitialFn, RecordPolicy, SpatialScheme, StepOutput, Trajectory, TransportProblem};

pub type Result<T> = std::result::Result<T, TransportError>;
