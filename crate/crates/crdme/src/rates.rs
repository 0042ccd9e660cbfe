//! Jump and proposal rates of the lattice process.
//!
//! These are the reference implementations used by the exact-CTMC oracle and
//! by tests; the event loop reaches the same numbers through incrementally
//! maintained potential fields.

use rdd_core::{
    backward_placement_distribution, KernelSpec, Mesh, PotentialTable, SpeciesId, SystemScale,
};

use crate::error::CrdmeError;
use crate::state::LatticeState;

/// The drift factor `delta / (exp(delta) - 1)` of the hop rate, evaluated
/// stably across all regimes: a series branch near zero, `exp_m1` elsewhere.
/// Overflow for very large positive `delta` degrades gracefully to zero and
/// large negative `delta` to `-delta`.
pub fn jump_factor(delta: f64) -> f64 {
    if delta.abs() < 1e-8 {
        1.0 - 0.5 * delta
    } else {
        delta / delta.exp_m1()
    }
}

/// Hop rate over one voxel edge: `(D / h^2) * jump_factor(delta)`.
pub fn hop_rate(diffusivity: f64, spacing: f64, delta: f64) -> f64 {
    diffusivity / (spacing * spacing) * jump_factor(delta)
}

/// Scaled energy difference a particle of species `s` sees when hopping
/// `from -> to`, against the rest of the state (its own contribution is
/// excluded).
pub fn hop_delta(
    state: &LatticeState,
    s: SpeciesId,
    from: usize,
    to: usize,
    table: &PotentialTable,
    scale: SystemScale,
) -> f64 {
    let mesh = &state.mesh;
    let mut bath = 0.0;
    for (sp, row) in state.counts.iter().enumerate() {
        let sp = SpeciesId(sp);
        for (m, &cnt) in row.iter().enumerate() {
            if cnt == 0 {
                continue;
            }
            bath += cnt as f64
                * (table.pair(s, sp, mesh.node_distance(to, m))
                    - table.pair(s, sp, mesh.node_distance(from, m)));
        }
    }
    let self_term = table.pair(s, s, mesh.node_distance(to, from)) - table.pair(s, s, 0.0);
    let external = table.one_body(s, mesh.node(to)) - table.one_body(s, mesh.node(from));
    external + bath / state.gamma_f() - self_term / scale.gamma
}

/// Proposal rate for one A particle in voxel `i` and one B particle in voxel
/// `j` to attempt binding: the scaled kernel `lambda * K(x_i, x_j) / gamma`.
pub fn binding_proposal_rate(
    lambda: f64,
    kernel: &KernelSpec,
    scale: SystemScale,
    x_i: f64,
    y_j: f64,
) -> f64 {
    lambda * kernel.eval(x_i, y_j) / scale.gamma
}

/// Total proposal rate for one complex in voxel `k` to attempt unbinding:
/// `mu / Z_AB` times the discrete marginal of the backward placement
/// weights at `z_k`. With the normalizer taken on the same mesh, the
/// marginal and `Z_AB` are the same sum and the rate is `mu`.
pub fn unbinding_proposal_rate(
    mu: f64,
    mesh: &Mesh,
    kernel: &KernelSpec,
    table: &PotentialTable,
    products: (SpeciesId, SpeciesId),
    scale: SystemScale,
    k_voxel: usize,
) -> Result<f64, CrdmeError> {
    let at_k =
        backward_placement_distribution(mesh.node(k_voxel), mesh, kernel, table, products, scale)?;
    let z_ab =
        backward_placement_distribution(mesh.node(0), mesh, kernel, table, products, scale)?
            .normalizer;
    Ok(mu * at_k.normalizer / z_ab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdd_core::Mesh;
    use std::f64::consts::PI;

    const A: SpeciesId = SpeciesId(0);
    const C: SpeciesId = SpeciesId(2);

    fn paper_table() -> PotentialTable {
        PotentialTable::harmonic(200.0, 3.0, vec![0.05, 0.05, 0.1]).unwrap()
    }

    #[test]
    fn flat_landscape_gives_pure_diffusion() {
        assert_eq!(jump_factor(0.0), 1.0);
        let h = 2.0 * PI / 512.0;
        assert!((hop_rate(0.25, h, 0.0) - 0.25 / (h * h)).abs() < 1e-9);
    }

    #[test]
    fn log_two_tilt() {
        let f = jump_factor(std::f64::consts::LN_2);
        assert!((f - std::f64::consts::LN_2).abs() < 1e-15, "f = {f}");
    }

    #[test]
    fn detailed_balance_ratio() {
        for delta in [1e-3, 0.1, 1.0, 10.0, 20.0] {
            let ratio = jump_factor(delta) / jump_factor(-delta);
            let rel = (ratio / (-delta as f64).exp() - 1.0).abs();
            assert!(rel < 1e-13, "delta = {delta}, rel = {rel}");
        }
    }

    #[test]
    fn series_branch_joins_smoothly() {
        // Values straddling the series cutoff agree to near machine precision.
        let below = jump_factor(0.999e-8);
        let above = jump_factor(1.001e-8);
        assert!((below - above).abs() < 1e-10);
        // And the factor is continuous and close to 1 there.
        assert!((below - 1.0).abs() < 1e-8);
    }

    #[test]
    fn extreme_tilts_stay_finite() {
        assert_eq!(jump_factor(800.0), 0.0);
        assert!((jump_factor(-800.0) - 800.0).abs() < 1e-12);
        assert!(jump_factor(700.0) > 0.0);
    }

    #[test]
    fn lone_particle_feels_nothing() {
        let mesh = Mesh::new(2.0 * PI, 64).unwrap();
        let mut state = crate::state::LatticeState::empty(mesh, 3, 100);
        state.counts[A.0][10] = 1;
        let d = hop_delta(
            &state,
            A,
            10,
            11,
            &paper_table(),
            SystemScale::new(100.0),
        );
        assert_eq!(d, 0.0);
    }

    #[test]
    fn free_particles_feel_nothing() {
        let mesh = Mesh::new(2.0 * PI, 64).unwrap();
        let mut state = crate::state::LatticeState::empty(mesh, 3, 100);
        state.counts[A.0][10] = 3;
        state.counts[C.0][11] = 2;
        let d = hop_delta(
            &state,
            A,
            10,
            11,
            &PotentialTable::free(3),
            SystemScale::new(100.0),
        );
        assert_eq!(d, 0.0);
    }

    #[test]
    fn adjacent_pair_energy_by_hand() {
        // One A hops toward a stationary A one voxel away on a fine mesh.
        let mesh = Mesh::new(2.0 * PI, 512).unwrap();
        let h = mesh.spacing();
        let gamma = 50.0;
        let mut state = crate::state::LatticeState::empty(mesh, 3, 50);
        state.counts[A.0][100] = 1;
        state.counts[A.0][102] = 1;
        let table = paper_table();
        let d = hop_delta(&state, A, 100, 101, &table, SystemScale::new(gamma));
        // Bath change: u(h) - u(2h) for the A-A pair, reach 0.3.
        let u = |r: f64| 200.0 * (0.3f64 - r).max(0.0).powi(2);
        let expected = (u(h) - u(2.0 * h)) / gamma;
        assert!((d - expected).abs() < 1e-12, "d = {d}, expected = {expected}");
    }

    #[test]
    fn external_potential_tilts_the_hop() {
        // A lone particle in a linear external potential sees exactly the
        // nodal difference, with no amplitude scaling.
        let mesh = Mesh::new(2.0 * PI, 64).unwrap();
        let h = mesh.spacing();
        let mut state = crate::state::LatticeState::empty(mesh, 3, 100);
        state.counts[A.0][10] = 1;
        let table = PotentialTable::free(3).with_one_body(A, |x| 3.0 * x);
        let d = hop_delta(&state, A, 10, 11, &table, SystemScale::new(100.0));
        assert!((d - 3.0 * h).abs() < 1e-14, "d = {d}");
    }

    #[test]
    fn binding_rate_scales_inversely_with_gamma() {
        let kernel = KernelSpec::new(0.15, 2.0 * PI, 512).unwrap();
        let r1 = binding_proposal_rate(1.0, &kernel, SystemScale::new(50.0), 1.0, 1.1);
        let r2 = binding_proposal_rate(1.0, &kernel, SystemScale::new(100.0), 1.0, 1.1);
        assert!((r1 / r2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn distant_pair_has_negligible_proposal_rate() {
        let kernel = KernelSpec::new(0.05, 2.0 * PI, 512).unwrap();
        let r = binding_proposal_rate(1.0, &kernel, SystemScale::new(50.0), 0.0, PI);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn unbinding_rate_is_mu() {
        let mesh = Mesh::new(2.0 * PI, 128).unwrap();
        let kernel = KernelSpec::new(0.15, 2.0 * PI, 128).unwrap();
        let scale = SystemScale::new(50.0);
        // With repulsion on the paper parameters.
        let r = unbinding_proposal_rate(
            0.05,
            &mesh,
            &kernel,
            &paper_table(),
            (A, SpeciesId(1)),
            scale,
            37,
        )
        .unwrap();
        assert!((r / 0.05 - 1.0).abs() < 1e-13, "r = {r}");
        // And exactly so without it.
        let free = unbinding_proposal_rate(
            0.05,
            &mesh,
            &kernel,
            &PotentialTable::free(3),
            (A, SpeciesId(1)),
            scale,
            3,
        )
        .unwrap();
        assert!((free / 0.05 - 1.0).abs() < 1e-14);
    }
}
