//! Lattice jump-process simulator for reversible pair association with
//! soft-core interactions.
//!
//! Particles of species A, B, and C live on a periodic one-dimensional
//! lattice. They hop between neighboring voxels at rates tilted by the
//! interaction energy landscape, A and B pairs propose binding through a
//! Gaussian kernel, and complexes propose unbinding with products placed by
//! kernel-and-repulsion weights. Proposals pass a Metropolis acceptance
//! test, which makes the reversible reaction fluxes balance pointwise in
//! equilibrium. The exact direct-method event loop keeps all propensities
//! incrementally; ensembles of replicated trajectories reduce to
//! bit-reproducible statistics regardless of worker count.

pub mod ensemble;
pub mod error;
pub mod model;
mod phi;
pub mod rates;
mod schedule;
pub mod simulator;
pub mod state;
pub mod tables;

pub use ensemble::{run_ensemble, EnsembleSpec, EnsembleStats};
pub use error::CrdmeError;
pub use model::{default_species, PairModel};
pub use rates::{
    binding_proposal_rate, hop_delta, hop_rate, jump_factor, unbinding_proposal_rate,
};
pub use simulator::{Event, EventCounters, Simulator, Snapshot, PARANOID_TOL};
pub use state::{initialize_particles, LatticeState};
pub use tables::ModelTables;
