//! Initial layers in the fast time `τ = t/ε²`.
//!
//! A layer solves `∂_τ Θ + Θ − Θ̄ = S` from `Θ(0) = Θ_o`, pointwise in `x`.
//! The solution is given by an integrating factor:
//! `Θ(τ) = Θ̄_o + e^{−τ}(Θ_o − Θ̄_o) + ∫_0^τ {S̄ + e^{τ′−τ}(S − S̄)} dτ′`,
//! with limit `Θ_∞ = Θ̄_o + ∫_0^∞ S̄ dτ`.

mod build;
mod error;
mod layer;
mod quadrature;

pub use build::{build_ui0, build_ui1, build_ui1_dx, x_derivative, InitialDatum};
pub use error::LayerError;
pub use layer::{rk4_oracle, solve_initial_layer, InitialLayerProblem, InitialLayerTerm, LayerSource};
pub use quadrature::integrate_adaptive;

pub type Result<T> = std::result::Result<T, LayerError>;
