//! Independent reference solutions for validating the simulators.
//!
//! Everything here is built from first principles rather than from the
//! production code paths: exact finite-state Markov chains with dense
//! matrix exponentials for micro lattice instances, closed-form stationary
//! weights for reversibility checks, total-energy bookkeeping, and a
//! near-machine-precision integrator for the well-mixed mass-action limit.
//! Tests elsewhere in the workspace compare stochastic and deterministic
//! solvers against these targets.

pub mod ctmc;
pub mod energy;
pub mod error;
pub mod wellmixed;

pub use ctmc::{build_micro_ctmc, MicroCTMC, STATE_CAP};
pub use energy::{stationary_weight, total_energy};
pub use error::OracleError;
pub use wellmixed::{wellmixed_ode, wellmixed_series};
