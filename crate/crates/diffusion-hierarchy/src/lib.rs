//! Interior diffusion hierarchy `Ū₀, Ū₁, Ū₂` and assembly of the approximate
//! solution `u_a` with its initial and boundary layers.
//!
//! The interior levels solve heat equations with diffusivity
//! `D = ½ Σ w μ²` of the angular rule; they are shared by every `ε`.

mod bundle;
mod compat;
mod error;
mod heat;
mod hierarchy;

pub use bundle::{cell_points, Assembly, Constituents, ExpansionBundle, ExpansionSetup, Hierarchy, Sources, CELL_GAUSS};
pub use compat::{check_compatibility, CompatibilityReport, ConditionCheck};
pub use error::HierarchyError;
pub use heat::{solve_heat, HeatBoundary, HeatProblem, HeatSolution, PointSampler, Series, MAX_DERIVATIVE};
pub use hierarchy::{build_u0, build_u1, build_u2, milne_limit_series, HeatGrid, Interior, InteriorSample, WallSeries};

pub type Result<T> = std::result::Result<T, HierarchyError>;
