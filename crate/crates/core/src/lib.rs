//! Shared model layer for interacting-particle reaction-drift-diffusion
//! simulations on a periodic interval: species and reaction networks, pair
//! and one-body potentials, displacement kernels, concentration measures,
//! detailed-balance acceptance probabilities, and product placement
//! densities. Both the stochastic lattice simulator and the mean-field
//! solver are built on these primitives.

pub mod acceptance;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod measure;
pub mod mesh;
pub mod placement;
pub mod potential;
pub mod reaction;
pub mod species;

pub use acceptance::{
    acceptance_exponent, acceptance_exponent_meanfield, acceptance_probability,
    acceptance_probability_meanfield, ReactionConfiguration,
};
pub use error::CoreError;
pub use geometry::{periodic_distance, wrap_position};
pub use kernel::{kernel_normalization, KernelSpec};
pub use measure::{interaction_energy, BathMeasure, FieldMeasure, LatticeMeasure};
pub use mesh::Mesh;
pub use placement::{backward_placement_distribution, sample_forward_placement, BackwardPlacement};
pub use potential::PotentialTable;
pub use reaction::{AcceptanceForm, PlacementRule, ReactionNetwork, ReactionSpec};
pub use species::{SpeciesId, SpeciesSpec, SystemScale};
