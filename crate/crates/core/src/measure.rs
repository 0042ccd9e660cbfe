//! Concentration states as measures on the circle.
//!
//! Both the particle lattice state (atoms of weight `1/gamma` at mesh nodes)
//! and mean-field concentration profiles (density times voxel width) expose
//! the same integration interface, so interaction energies and acceptance
//! probabilities are written once against either.

use crate::error::CoreError;
use crate::mesh::Mesh;
use crate::potential::PotentialTable;
use crate::species::{SpeciesId, SystemScale};

pub trait BathMeasure {
    fn n_species(&self) -> usize;

    fn length(&self) -> f64;

    /// Integral of `f` against the concentration measure of species `j`.
    fn integrate(&self, j: SpeciesId, f: &mut dyn FnMut(f64) -> f64) -> f64;

    /// Number of whole particles of species `j` sitting exactly at `x`,
    /// or `None` for continuum states that have no atoms.
    fn particles_at(&self, j: SpeciesId, x: f64) -> Option<usize>;
}

/// Voxel counts read as the measure `sum_i counts[j][i] / gamma * delta(x_i)`.
pub struct LatticeMeasure<'a> {
    pub mesh: &'a Mesh,
    pub counts: &'a [Vec<u32>],
    pub gamma: f64,
}

impl BathMeasure for LatticeMeasure<'_> {
    fn n_species(&self) -> usize {
        self.counts.len()
    }

    fn length(&self) -> f64 {
        self.mesh.length()
    }

    fn integrate(&self, j: SpeciesId, f: &mut dyn FnMut(f64) -> f64) -> f64 {
        let mut sum = 0.0;
        for (i, &c) in self.counts[j.0].iter().enumerate() {
            if c > 0 {
                sum += c as f64 * f(self.mesh.node(i));
            }
        }
        sum / self.gamma
    }

    fn particles_at(&self, j: SpeciesId, x: f64) -> Option<usize> {
        match self.mesh.node_index_of(x) {
            Some(i) => Some(self.counts[j.0][i] as usize),
            None => Some(0),
        }
    }
}

/// Nodal concentration fields read as the measure `sum_i h * S_j(x_i) * delta(x_i)`,
/// the trapezoidal discretization of `S_j(x) dx`.
pub struct FieldMeasure<'a> {
    pub mesh: &'a Mesh,
    pub values: &'a [Vec<f64>],
}

impl BathMeasure for FieldMeasure<'_> {
    fn n_species(&self) -> usize {
        self.values.len()
    }

    fn length(&self) -> f64 {
        self.mesh.length()
    }

    fn integrate(&self, j: SpeciesId, f: &mut dyn FnMut(f64) -> f64) -> f64 {
        let h = self.mesh.spacing();
        let mut sum = 0.0;
        for (i, &v) in self.values[j.0].iter().enumerate() {
            sum += v * f(self.mesh.node(i));
        }
        h * sum
    }

    fn particles_at(&self, _j: SpeciesId, _x: f64) -> Option<usize> {
        None
    }
}

/// Scaled interaction energy of a test particle of species `s` at `x`
/// against the state, with the listed particles excluded from the bath.
///
/// The bath term integrates `u_{s,s'}` against every species' measure; each
/// exclusion then removes one particle's worth `u / gamma`. Excluding a
/// particle the state does not hold is an error, as is excluding anything
/// from a continuum state.
pub fn interaction_energy(
    s: SpeciesId,
    x: f64,
    state: &dyn BathMeasure,
    table: &PotentialTable,
    scale: SystemScale,
    exclusions: &[(SpeciesId, f64)],
) -> Result<f64, CoreError> {
    check_exclusions(state, exclusions)?;
    let length = state.length();
    let mut energy = 0.0;
    for j in 0..state.n_species() {
        let j = SpeciesId(j);
        energy += state.integrate(j, &mut |y| {
            table.pair(s, j, crate::geometry::periodic_distance(x, y, length))
        });
    }
    for &(j, y) in exclusions {
        energy -= table.pair(s, j, crate::geometry::periodic_distance(x, y, length)) / scale.gamma;
    }
    Ok(energy)
}

fn check_exclusions(
    state: &dyn BathMeasure,
    exclusions: &[(SpeciesId, f64)],
) -> Result<(), CoreError> {
    for (idx, &(j, y)) in exclusions.iter().enumerate() {
        let available = match state.particles_at(j, y) {
            Some(n) => n,
            None => return Err(CoreError::ContinuumExclusion),
        };
        // Count how often this same particle slot is excluded.
        let wanted = exclusions[..=idx]
            .iter()
            .filter(|&&(k, z)| k == j && z == y)
            .count();
        if wanted > available {
            return Err(CoreError::InconsistentExclusion {
                species: j.0,
                position: y,
                excluded: wanted,
                available,
            });
        }
    }
    Ok(())
}
