//! Metropolis-style acceptance probabilities for reaction events.
//!
//! A proposed reaction is accepted with probability `min(1, exp(-dPhi))`,
//! where `dPhi` compares the potential energy the products would feel
//! against the energy the substrates felt, both evaluated against the same
//! pre-event state with the substrates themselves excluded from the bath.
//! The three [`AcceptanceForm`]s differ in which within-reactant pair terms
//! remain, matched so that forward/backward pairs obey detailed balance.
//! The mean-field variant drops all single-particle exclusion corrections.

use crate::error::CoreError;
use crate::geometry::periodic_distance;
use crate::measure::{interaction_energy, BathMeasure};
use crate::potential::PotentialTable;
use crate::reaction::AcceptanceForm;
use crate::species::{SpeciesId, SystemScale};

/// One concrete reaction event: which particles are consumed where, and
/// which are created where.
#[derive(Clone, Debug)]
pub struct ReactionConfiguration {
    pub substrates: Vec<(SpeciesId, f64)>,
    pub products: Vec<(SpeciesId, f64)>,
    pub form: AcceptanceForm,
}

/// The exponent `dPhi` of the acceptance probability at scale `gamma`.
///
/// Exposed separately so tests can assert exact forward/backward antisymmetry
/// without going through the `min(1, ..)` clamp.
pub fn acceptance_exponent(
    cfg: &ReactionConfiguration,
    state: &dyn BathMeasure,
    table: &PotentialTable,
    scale: SystemScale,
) -> Result<f64, CoreError> {
    let exclusions = &cfg.substrates;
    let mut before = 0.0;
    for &(s, x) in &cfg.substrates {
        before += table.one_body(s, x) + interaction_energy(s, x, state, table, scale, exclusions)?;
    }
    let mut after = 0.0;
    for &(s, y) in &cfg.products {
        after += table.one_body(s, y) + interaction_energy(s, y, state, table, scale, exclusions)?;
    }
    let mut delta = after - before;
    if cfg.form == AcceptanceForm::Swap {
        let length = state.length();
        delta += within_set_energy(&cfg.products, table, scale, length)
            - within_set_energy(&cfg.substrates, table, scale, length);
    }
    Ok(delta)
}

pub fn acceptance_probability(
    cfg: &ReactionConfiguration,
    state: &dyn BathMeasure,
    table: &PotentialTable,
    scale: SystemScale,
) -> Result<f64, CoreError> {
    Ok(clamp_probability(acceptance_exponent(cfg, state, table, scale)?))
}

/// Mean-field limit of [`acceptance_exponent`]: the bath is the full state
/// and no per-particle exclusion or within-set terms appear.
pub fn acceptance_exponent_meanfield(
    cfg: &ReactionConfiguration,
    state: &dyn BathMeasure,
    table: &PotentialTable,
) -> Result<f64, CoreError> {
    // The scale only enters through exclusion terms, which are absent here.
    let unused = SystemScale::new(1.0);
    let mut before = 0.0;
    for &(s, x) in &cfg.substrates {
        before += table.one_body(s, x) + interaction_energy(s, x, state, table, unused, &[])?;
    }
    let mut after = 0.0;
    for &(s, y) in &cfg.products {
        after += table.one_body(s, y) + interaction_energy(s, y, state, table, unused, &[])?;
    }
    Ok(after - before)
}

pub fn acceptance_probability_meanfield(
    cfg: &ReactionConfiguration,
    state: &dyn BathMeasure,
    table: &PotentialTable,
) -> Result<f64, CoreError> {
    Ok(clamp_probability(acceptance_exponent_meanfield(
        cfg, state, table,
    )?))
}

fn clamp_probability(delta_phi: f64) -> f64 {
    if delta_phi <= 0.0 {
        1.0
    } else {
        (-delta_phi).exp()
    }
}

fn within_set_energy(
    set: &[(SpeciesId, f64)],
    table: &PotentialTable,
    scale: SystemScale,
    length: f64,
) -> f64 {
    let mut e = 0.0;
    for (i, &(s, x)) in set.iter().enumerate() {
        for &(t, y) in &set[i + 1..] {
            e += table.pair(s, t, periodic_distance(x, y, length)) / scale.gamma;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::LatticeMeasure;
    use crate::mesh::Mesh;

    const A: SpeciesId = SpeciesId(0);
    const B: SpeciesId = SpeciesId(1);
    const C: SpeciesId = SpeciesId(2);

    fn paper_table() -> PotentialTable {
        PotentialTable::harmonic(200.0, 3.0, vec![0.05, 0.05, 0.1]).unwrap()
    }

    fn binding_cfg(x: f64, y: f64, z: f64) -> ReactionConfiguration {
        ReactionConfiguration {
            substrates: vec![(A, x), (B, y)],
            products: vec![(C, z)],
            form: AcceptanceForm::Binding,
        }
    }

    #[test]
    fn free_system_always_accepts() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let mut counts = vec![vec![0u32; 16]; 3];
        counts[A.0][2] = 1;
        counts[B.0][3] = 1;
        let state = LatticeMeasure {
            mesh: &m,
            counts: &counts,
            gamma: 8.0,
        };
        let p = acceptance_probability(
            &binding_cfg(m.node(2), m.node(3), m.node(2)),
            &state,
            &PotentialTable::free(3),
            SystemScale::new(8.0),
        )
        .unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn one_body_step_gives_exact_half() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let mut counts = vec![vec![0u32; 16]; 3];
        counts[A.0][2] = 1;
        counts[B.0][3] = 1;
        let state = LatticeMeasure {
            mesh: &m,
            counts: &counts,
            gamma: 8.0,
        };
        let table = PotentialTable::free(3).with_one_body(C, |_| std::f64::consts::LN_2);
        let p = acceptance_probability(
            &binding_cfg(m.node(2), m.node(3), m.node(2)),
            &state,
            &table,
            SystemScale::new(8.0),
        )
        .unwrap();
        assert!((p - 0.5).abs() < 1e-15, "p = {p}");
    }

    #[test]
    fn downhill_moves_clamp_to_one() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let mut counts = vec![vec![0u32; 16]; 3];
        counts[A.0][2] = 1;
        counts[B.0][3] = 1;
        let state = LatticeMeasure {
            mesh: &m,
            counts: &counts,
            gamma: 8.0,
        };
        let table = PotentialTable::free(3).with_one_body(C, |_| -5.0);
        let cfg = binding_cfg(m.node(2), m.node(3), m.node(3));
        let p = acceptance_probability(&cfg, &state, &table, SystemScale::new(8.0)).unwrap();
        assert_eq!(p, 1.0);
        assert!(acceptance_exponent(&cfg, &state, &table, SystemScale::new(8.0)).unwrap() < 0.0);
    }

    #[test]
    fn missing_substrate_is_an_error() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 16).unwrap();
        let counts = vec![vec![0u32; 16]; 3];
        let state = LatticeMeasure {
            mesh: &m,
            counts: &counts,
            gamma: 8.0,
        };
        let err = acceptance_probability(
            &binding_cfg(m.node(2), m.node(3), m.node(2)),
            &state,
            &paper_table(),
            SystemScale::new(8.0),
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::InconsistentExclusion { .. }));
    }

    #[test]
    fn forward_backward_exponents_are_exact_negatives() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 64).unwrap();
        let gamma = 37.0;
        let scale = SystemScale::new(gamma);
        let table = paper_table();

        // A shared bath of spectator particles.
        let mut bath = vec![vec![0u32; 64]; 3];
        bath[A.0][10] = 2;
        bath[C.0][12] = 1;
        bath[B.0][60] = 3;

        let (xi, yi, zi) = (11usize, 12usize, 11usize);

        // Pre-binding state: bath plus the substrate pair.
        let mut counts1 = bath.clone();
        counts1[A.0][xi] += 1;
        counts1[B.0][yi] += 1;
        let state1 = LatticeMeasure {
            mesh: &m,
            counts: &counts1,
            gamma,
        };
        let forward = acceptance_exponent(
            &binding_cfg(m.node(xi), m.node(yi), m.node(zi)),
            &state1,
            &table,
            scale,
        )
        .unwrap();

        // Pre-unbinding state: same bath plus the product complex.
        let mut counts2 = bath.clone();
        counts2[C.0][zi] += 1;
        let state2 = LatticeMeasure {
            mesh: &m,
            counts: &counts2,
            gamma,
        };
        let backward = acceptance_exponent(
            &ReactionConfiguration {
                substrates: vec![(C, m.node(zi))],
                products: vec![(A, m.node(xi)), (B, m.node(yi))],
                form: AcceptanceForm::Unbinding,
            },
            &state2,
            &table,
            scale,
        )
        .unwrap();

        assert!(
            (forward + backward).abs() < 1e-13,
            "forward = {forward}, backward = {backward}"
        );
    }

    #[test]
    fn swap_of_identical_configurations_accepts() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 64).unwrap();
        let mut counts = vec![vec![0u32; 64]; 3];
        counts[A.0][5] = 1;
        counts[B.0][6] = 1;
        counts[C.0][40] = 2;
        let state = LatticeMeasure {
            mesh: &m,
            counts: &counts,
            gamma: 12.0,
        };
        let cfg = ReactionConfiguration {
            substrates: vec![(A, m.node(5)), (B, m.node(6))],
            products: vec![(A, m.node(5)), (B, m.node(6))],
            form: AcceptanceForm::Swap,
        };
        let p =
            acceptance_probability(&cfg, &state, &paper_table(), SystemScale::new(12.0)).unwrap();
        assert_eq!(p, 1.0);
        let d =
            acceptance_exponent(&cfg, &state, &paper_table(), SystemScale::new(12.0)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn meanfield_limit_matches_large_gamma() {
        let m = Mesh::new(2.0 * std::f64::consts::PI, 64).unwrap();
        let gamma = 40.0;
        let mut counts = vec![vec![0u32; 64]; 3];
        counts[A.0][5] = 3;
        counts[B.0][6] = 2;
        counts[C.0][7] = 4;
        counts[A.0][30] = 1;
        let state = LatticeMeasure {
            mesh: &m,
            counts: &counts,
            gamma,
        };
        let cfg = binding_cfg(m.node(5), m.node(6), m.node(6));
        let table = paper_table();
        let mf = acceptance_exponent_meanfield(&cfg, &state, &table).unwrap();
        // Same fixed measure, but exclusion corrections scaled by a huge gamma.
        let nearly_mf =
            acceptance_exponent(&cfg, &state, &table, SystemScale::new(1.0e12)).unwrap();
        assert!((mf - nearly_mf).abs() < 1e-9, "{mf} vs {nearly_mf}");
        // And at moderate gamma the difference is visible.
        let at_gamma = acceptance_exponent(&cfg, &state, &table, SystemScale::new(gamma)).unwrap();
        assert!((mf - at_gamma).abs() > 1e-4);
    }
}
