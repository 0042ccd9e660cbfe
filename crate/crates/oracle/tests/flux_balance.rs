//! Pointwise reversibility of the exact micro chains.
//!
//! For every ordered pair of states the probability flux under the
//! closed-form stationary weight must balance: `W(S) Q(S, S') = W(S') Q(S',
//! S)`. This exercises hops, binding, and unbinding together, since the
//! weight couples the interaction energies, the kernel normalizer, and the
//! occupancy factorials in one formula.

use rdd_core::{KernelSpec, Mesh, PotentialTable, SpeciesSpec};
use rdd_crdme::PairModel;
use rdd_oracle::{build_micro_ctmc, stationary_weight, MicroCTMC};
use std::f64::consts::PI;

fn lively_species() -> Vec<SpeciesSpec> {
    vec![
        SpeciesSpec::new("A", 2.0, 0.05),
        SpeciesSpec::new("B", 1.5, 0.05),
        SpeciesSpec::new("C", 1.0, 0.1),
    ]
}

fn instance(
    n_voxels: usize,
    kappa: f64,
    lambda: f64,
    mu: f64,
    gamma: usize,
) -> PairModel {
    let mesh = Mesh::new(2.0 * PI, n_voxels).unwrap();
    let kernel = KernelSpec::new(0.8, 2.0 * PI, 256).unwrap();
    let table = PotentialTable::harmonic(kappa, 3.0, vec![0.05, 0.05, 0.1]).unwrap();
    PairModel::reversible(mesh, lively_species(), table, kernel, lambda, mu, gamma).unwrap()
}

fn occupancy(n: usize, entries: &[(usize, usize, u32)]) -> Vec<Vec<u32>> {
    let mut counts = vec![vec![0; n]; 3];
    for &(s, k, c) in entries {
        counts[s][k] = c;
    }
    counts
}

fn unflatten(flat: &[u32], n: usize) -> Vec<Vec<u32>> {
    (0..3).map(|s| flat[s * n..(s + 1) * n].to_vec()).collect()
}

fn assert_reversible(model: &PairModel, ctmc: &MicroCTMC, n: usize) {
    let weights: Vec<f64> = ctmc
        .states
        .iter()
        .map(|flat| stationary_weight(model, &unflatten(flat, n)).unwrap())
        .collect();
    let mut checked = 0usize;
    for i in 0..ctmc.n_states {
        for j in 0..ctmc.n_states {
            if i == j {
                continue;
            }
            let forward = weights[i] * ctmc.rate(i, j);
            let backward = weights[j] * ctmc.rate(j, i);
            let scale = forward.abs().max(backward.abs());
            if scale == 0.0 {
                continue;
            }
            checked += 1;
            assert!(
                (forward - backward).abs() <= 1e-12 * scale,
                "flux imbalance between states {i} and {j}: {forward} vs {backward}"
            );
        }
    }
    assert!(checked > 0, "no transitions were checked");
}

fn assert_stationary_matches(model: &PairModel, ctmc: &MicroCTMC, n: usize) {
    let weights: Vec<f64> = ctmc
        .states
        .iter()
        .map(|flat| stationary_weight(model, &unflatten(flat, n)).unwrap())
        .collect();
    let z: f64 = weights.iter().sum();
    let pi = ctmc.stationary().unwrap();
    for (idx, (&p, &w)) in pi.iter().zip(weights.iter()).enumerate() {
        assert!(
            (p - w / z).abs() < 1e-10,
            "state {idx}: solved {p}, closed form {}",
            w / z
        );
    }
}

#[test]
fn two_voxel_pair_is_reversible() {
    let model = instance(2, 200.0, 1.0, 0.05, 10);
    let counts = occupancy(2, &[(0, 0, 1), (1, 1, 1)]);
    let ctmc = build_micro_ctmc(&model, &counts).unwrap();
    assert_eq!(ctmc.n_states, 6);
    assert_reversible(&model, &ctmc, 2);
    assert_stationary_matches(&model, &ctmc, 2);
}

#[test]
fn three_voxel_mixture_with_a_complex_is_reversible() {
    let model = instance(3, 200.0, 2.0, 0.5, 20);
    let counts = occupancy(3, &[(0, 0, 1), (1, 2, 1), (2, 1, 1)]);
    let ctmc = build_micro_ctmc(&model, &counts).unwrap();
    assert_eq!(ctmc.n_states, 69);
    assert_reversible(&model, &ctmc, 3);
    assert_stationary_matches(&model, &ctmc, 3);
}

#[test]
fn crowded_three_voxel_instance_is_reversible() {
    // Two of each substrate so same-voxel stacking and its factorial
    // corrections matter.
    let model = instance(3, 300.0, 5.0, 1.0, 16);
    let counts = occupancy(3, &[(0, 0, 2), (1, 1, 2)]);
    let ctmc = build_micro_ctmc(&model, &counts).unwrap();
    assert_reversible(&model, &ctmc, 3);
    assert_stationary_matches(&model, &ctmc, 3);
}
