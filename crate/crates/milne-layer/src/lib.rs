//! Milne half-space problem `ν ∂η Φ + Φ − Φ̄ = 0` with incoming datum at
//! `η = 0`, and the boundary-layer correctors built from it.
//!
//! `ν` is the velocity component pointing into the slab. At the left wall
//! `ν = μ`, at the right wall `ν = −μ`.

mod cutoff;
mod error;
mod extension;
mod milne;

pub use cutoff::{chi, chi_prime, chi_tilde, CutoffLayer, LayerDatum};
pub use error::MilneError;
pub use extension::SpecularExtension;
pub use milne::{solve_milne, MilneBasis, MilneGrid, MilneProblem, MilneSolution};

pub type Result<T> = std::result::Result<T, MilneError>;
