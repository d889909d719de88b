//! Remainder `R = u^ε − u_a` of the diffusive expansion: its data, the norms
//! entering the energy and kernel estimates, Poisson potentials, identity
//! residuals and log-log rate fits.

mod error;
pub mod estimate;
pub mod identities;
pub mod poisson;
pub mod rate;
pub mod remainder;

pub use error::LabError;
pub use estimate::{compute_norms, estimate_check, scaled_remainder, EstimateCheck, EstimateKind, RemainderNorms, DELTA};
pub use identities::{identity_residuals, Balance, IdentityResiduals, IdentityRules, Potentials, TimeRule};
pub use poisson::{h2_norm, poisson_solve, PoissonBc, PoissonSolution};
pub use rate::{fit_rate, refinement_orders, RateFit};
pub use remainder::{compute_remainder, mean_average, remainder_data, remainder_of, renormalize, Remainder, RemainderData};

pub type Result<T> = std::result::Result<T, LabError>;
