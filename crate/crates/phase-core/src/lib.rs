//! Phase-space plumbing for the slab transport laboratory.
//!
//! The slab is the interval `(0, L)` with velocity cosine `μ ∈ [−1, 1]`.
//! Angular integrals use a Gauss–Legendre rule with total weight 2, so the
//! velocity average of `f` is `½ Σ w_k f_k`.

pub mod error;
pub mod field;
pub mod geometry;
pub mod grid;
pub mod norms;
pub mod quadrature;
pub mod stencil;

pub use error::CoreError;
pub use field::{PhaseField, ScalarField, WallTrace};
pub use geometry::{Side, SlabGeometry};
pub use grid::{Grading, SpatialGrid};
pub use norms::{HalfRange, NormKind};
pub use quadrature::Quadrature;

pub type Result<T> = std::result::Result<T, CoreError>;
