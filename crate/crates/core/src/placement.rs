//! Product placement densities for reaction events.
//!
//! Forward binding places the single product on one of the substrate
//! positions with equal odds. Backward unbinding places one product at the
//! dissociating complex and draws its partner from the displacement kernel
//! reweighted by the Boltzmann factor of the scaled product pair potential.

use rand::Rng;

use crate::error::CoreError;
use crate::kernel::KernelSpec;
use crate::mesh::Mesh;
use crate::potential::PotentialTable;
use crate::reaction::PlacementRule;
use crate::species::{SpeciesId, SystemScale};

/// Draws the product location for a forward binding event.
pub fn sample_forward_placement<R: Rng + ?Sized>(
    rule: PlacementRule,
    substrate_positions: &[f64],
    rng: &mut R,
) -> Result<f64, CoreError> {
    match rule {
        PlacementRule::SplitDelta => {
            if substrate_positions.len() != 2 {
                return Err(CoreError::InvalidPlacement(format!(
                    "split placement needs exactly two substrate positions, got {}",
                    substrate_positions.len()
                )));
            }
            let pick = rng.gen_range(0..2);
            Ok(substrate_positions[pick])
        }
        other => Err(CoreError::InvalidPlacement(format!(
            "{other:?} does not draw a single forward product"
        ))),
    }
}

/// Partner-position weights for an unbinding event at `z`.
///
/// `weights[i] = h * K(x_i, z) * exp(-u_{a,b}(|x_i - z|) / gamma)`; their sum
/// is the normalizer of the backward placement density. The weights are the
/// same whichever of the two products stays at `z`, since the pair potential
/// is symmetric.
#[derive(Clone, Debug)]
pub struct BackwardPlacement {
    pub weights: Vec<f64>,
    pub normalizer: f64,
}

impl BackwardPlacement {
    /// Draws a partner voxel index proportionally to the weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let target = rng.gen::<f64>() * self.normalizer;
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }
}

pub fn backward_placement_distribution(
    z: f64,
    mesh: &Mesh,
    kernel: &KernelSpec,
    table: &PotentialTable,
    products: (SpeciesId, SpeciesId),
    scale: SystemScale,
) -> Result<BackwardPlacement, CoreError> {
    let h = mesh.spacing();
    let (a, b) = products;
    let weights: Vec<f64> = mesh
        .nodes()
        .map(|x| {
            let d = crate::geometry::periodic_distance(x, z, mesh.length());
            h * kernel.eval_distance(d) * (-table.pair(a, b, d) / scale.gamma).exp()
        })
        .collect();
    let normalizer: f64 = weights.iter().sum();
    if !(normalizer.is_finite() && normalizer > 0.0) {
        return Err(CoreError::EmptyPlacement(z));
    }
    Ok(BackwardPlacement {
        weights,
        normalizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const A: SpeciesId = SpeciesId(0);
    const B: SpeciesId = SpeciesId(1);

    #[test]
    fn split_placement_is_a_fair_coin() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let positions = [1.0, 2.5];
        let mut at_first = 0usize;
        let n = 100_000;
        for _ in 0..n {
            let z = sample_forward_placement(PlacementRule::SplitDelta, &positions, &mut rng)
                .unwrap();
            if z == positions[0] {
                at_first += 1;
            } else {
                assert_eq!(z, positions[1]);
            }
        }
        let frac = at_first as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.005, "frac = {frac}");
    }

    #[test]
    fn split_placement_needs_two_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(
            sample_forward_placement(PlacementRule::SplitDelta, &[1.0], &mut rng).is_err()
        );
        assert!(sample_forward_placement(
            PlacementRule::BoltzmannBackward,
            &[1.0, 2.0],
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn coincident_substrates_place_at_their_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let z =
            sample_forward_placement(PlacementRule::SplitDelta, &[0.75, 0.75], &mut rng).unwrap();
        assert_eq!(z, 0.75);
    }

    #[test]
    fn free_backward_weights_follow_the_kernel() {
        let mesh = Mesh::new(2.0 * PI, 128).unwrap();
        let kernel = KernelSpec::new(0.15, 2.0 * PI, 128).unwrap();
        let table = PotentialTable::free(3);
        let z = mesh.node(40);
        let bp = backward_placement_distribution(
            z,
            &mesh,
            &kernel,
            &table,
            (A, B),
            SystemScale::new(50.0),
        )
        .unwrap();
        let h = mesh.spacing();
        for i in [0usize, 39, 40, 41, 100] {
            let expected = h * kernel.eval(mesh.node(i), z);
            assert!((bp.weights[i] - expected).abs() < 1e-15);
        }
        // The kernel marginal is one on its own normalization mesh.
        assert!((bp.normalizer - 1.0).abs() < 1e-10);
    }

    #[test]
    fn repulsion_suppresses_close_partners() {
        let mesh = Mesh::new(2.0 * PI, 128).unwrap();
        let kernel = KernelSpec::new(0.15, 2.0 * PI, 128).unwrap();
        let table = PotentialTable::harmonic(200.0, 3.0, vec![0.05, 0.05, 0.1]).unwrap();
        let z = mesh.node(40);
        let gamma = 50.0;
        let bp = backward_placement_distribution(
            z,
            &mesh,
            &kernel,
            &table,
            (A, B),
            SystemScale::new(gamma),
        )
        .unwrap();
        let h = mesh.spacing();
        // At the complex position the weight carries exp(-u(0)/gamma) = exp(-18/50).
        let expected = h * kernel.eval(z, z) * (-18.0 / gamma).exp();
        assert!((bp.weights[40] - expected).abs() < 1e-15);
        assert!(bp.normalizer < 1.0);
    }

    #[test]
    fn sampling_is_reproducible_and_in_support() {
        let mesh = Mesh::new(2.0 * PI, 64).unwrap();
        let kernel = KernelSpec::new(0.35, 2.0 * PI, 64).unwrap();
        let table = PotentialTable::harmonic(200.0, 3.0, vec![0.05, 0.05, 0.1]).unwrap();
        let bp = backward_placement_distribution(
            mesh.node(10),
            &mesh,
            &kernel,
            &table,
            (A, B),
            SystemScale::new(100.0),
        )
        .unwrap();
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..32).map(|_| bp.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
        for i in draw(5) {
            assert!(bp.weights[i] > 0.0);
        }
    }
}
