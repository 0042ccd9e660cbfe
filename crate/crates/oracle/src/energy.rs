//! Brute-force configuration energies and closed-form stationary weights,
//! by direct enumeration over particle pairs.

use rdd_core::{backward_placement_distribution, Mesh, PotentialTable, SpeciesId, SystemScale};
use rdd_crdme::PairModel;

use crate::error::OracleError;

/// Total energy of a lattice occupancy: every particle's one-body term plus
/// each unordered pair of distinct particles counted once at weight
/// `u / gamma`. Quadratic in the particle number; meant for tiny instances.
pub fn total_energy(
    counts: &[Vec<u32>],
    mesh: &Mesh,
    table: &PotentialTable,
    gamma: f64,
) -> f64 {
    let mut one_body = 0.0;
    let mut ordered_pairs = 0.0;
    for (s, row) in counts.iter().enumerate() {
        for (k, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            one_body += c as f64 * table.one_body(SpeciesId(s), mesh.node(k));
            for (s2, row2) in counts.iter().enumerate() {
                for (k2, &c2) in row2.iter().enumerate() {
                    if c2 == 0 {
                        continue;
                    }
                    let pairs = if s == s2 && k == k2 {
                        c as f64 * (c as f64 - 1.0)
                    } else {
                        c as f64 * c2 as f64
                    };
                    if pairs > 0.0 {
                        ordered_pairs += pairs
                            * table.pair(SpeciesId(s), SpeciesId(s2), mesh.node_distance(k, k2));
                    }
                }
            }
        }
    }
    one_body + ordered_pairs / (2.0 * gamma)
}

/// Unnormalized stationary weight of an occupancy under the reversible
/// dynamics:
///
/// ```text
/// W = exp(-total_energy) * (lambda * Z_AB / (gamma * mu * h))^(N_C) / prod n!
/// ```
///
/// The Boltzmann factor balances hops, the activity factor per complex
/// balances the binding/unbinding fluxes, and the factorials account for
/// indistinguishable particles sharing a voxel. For reaction-free systems
/// the weight reduces to the plain Boltzmann factor over occupancies.
pub fn stationary_weight(model: &PairModel, counts: &[Vec<u32>]) -> Result<f64, OracleError> {
    let gamma = model.gamma as f64;
    let scale = SystemScale::new(gamma);
    let z_ab = backward_placement_distribution(
        model.mesh.node(0),
        &model.mesh,
        &model.kernel,
        &model.table,
        (model.a, model.b),
        scale,
    )?
    .normalizer;
    let phi = total_energy(counts, &model.mesh, &model.table, gamma);
    let n_c: u32 = counts[model.c.0].iter().sum();
    let activity = if n_c == 0 {
        1.0
    } else {
        let h = model.mesh.spacing();
        (model.lambda * z_ab / (gamma * model.mu * h)).powi(n_c as i32)
    };
    let mut occupancy = 1.0;
    for row in counts {
        for &c in row {
            for m in 2..=c as u64 {
                occupancy *= m as f64;
            }
        }
    }
    Ok((-phi).exp() * activity / occupancy)
}
