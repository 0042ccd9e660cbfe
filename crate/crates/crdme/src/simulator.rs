//! The exact event loop: direct-method selection over maintained
//! propensities.
//!
//! Every event draws an exponential waiting time from the total propensity,
//! picks a channel proportionally, and applies it. Hops always execute;
//! reaction channels are proposals that pass a Metropolis test, so a
//! rejected proposal advances time and changes nothing else. All bookkeeping
//! (potential fields, hop tree, reaction aggregates) is updated
//! incrementally; a paranoid mode recomputes everything densely after each
//! event and fails loudly if the increments drifted.

use std::sync::Arc;

use rand::Rng;
use rdd_core::SpeciesId;

use crate::error::CrdmeError;
use crate::model::PairModel;
use crate::phi::{DirtySpans, PhiFields};
use crate::schedule::EventSchedule;
use crate::state::LatticeState;
use crate::tables::{for_span, ModelTables};

/// Relative tolerance for the paranoid consistency check.
pub const PARANOID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Hop {
        species: SpeciesId,
        from: usize,
        to: usize,
    },
    Binding {
        a_voxel: usize,
        b_voxel: usize,
        c_voxel: usize,
        accepted: bool,
    },
    Unbinding {
        c_voxel: usize,
        a_voxel: usize,
        b_voxel: usize,
        accepted: bool,
    },
    /// A proposal that dissolved before selection because a running
    /// aggregate exceeded the exact total by rounding. No state change;
    /// vanishing probability.
    StaleProposal,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventCounters {
    pub hops: u64,
    pub binding_proposals: u64,
    pub bindings: u64,
    pub unbinding_proposals: u64,
    pub unbindings: u64,
}

/// The lattice occupancy at one record time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub counts: Vec<Vec<u32>>,
}

pub struct Simulator {
    tables: Arc<ModelTables>,
    pub state: LatticeState,
    phi: PhiFields,
    sched: EventSchedule,
    dirty: DirtySpans,
    pub counters: EventCounters,
    paranoid: bool,
}

impl Simulator {
    pub fn new(model: &PairModel, state: LatticeState) -> Result<Self, CrdmeError> {
        let tables = Arc::new(ModelTables::build(model)?);
        Simulator::with_tables(tables, state)
    }

    /// Builds a simulator around shared tables; used by ensembles to avoid
    /// rebuilding per replicate.
    pub fn with_tables(
        tables: Arc<ModelTables>,
        state: LatticeState,
    ) -> Result<Self, CrdmeError> {
        if state.counts.len() != tables.n_species {
            return Err(CrdmeError::InvalidInput(format!(
                "state has {} species rows, model has {}",
                state.counts.len(),
                tables.n_species
            )));
        }
        if state.counts.iter().any(|row| row.len() != tables.n) {
            return Err(CrdmeError::InvalidInput(format!(
                "state rows must have {} voxels",
                tables.n
            )));
        }
        if state.mesh.n_voxels() != tables.n
            || (state.mesh.spacing() - tables.h).abs() > 1e-12 * tables.h
        {
            return Err(CrdmeError::InvalidInput(
                "state mesh does not match the model mesh".into(),
            ));
        }
        if state.gamma_f() != tables.gamma_f {
            return Err(CrdmeError::InvalidInput(format!(
                "state gamma {} does not match model gamma {}",
                state.gamma, tables.gamma_f
            )));
        }
        let phi = PhiFields::build(&tables, &state.counts);
        let sched = EventSchedule::rebuild(&tables, &state.counts, &phi);
        let dirty = DirtySpans::new(tables.n_species);
        Ok(Simulator {
            tables,
            state,
            phi,
            sched,
            dirty,
            counters: EventCounters::default(),
            paranoid: false,
        })
    }

    /// After every event, recompute all incremental structures densely and
    /// error out if they deviate by more than [`PARANOID_TOL`].
    pub fn set_paranoid(&mut self, on: bool) {
        self.paranoid = on;
    }

    pub fn tables(&self) -> &ModelTables {
        &self.tables
    }

    pub fn total_propensity(&self) -> f64 {
        self.sched.total(&self.tables)
    }

    /// Largest relative deviation of the incremental fields and schedule
    /// from a dense rebuild.
    pub fn consistency_error(&self) -> f64 {
        let phi_ref = PhiFields::build(&self.tables, &self.state.counts);
        let sched_ref = EventSchedule::rebuild(&self.tables, &self.state.counts, &phi_ref);
        self.phi
            .deviation_from(&phi_ref)
            .max(self.sched.deviation_from(&sched_ref))
    }

    pub fn check_consistency(&self, tol: f64) -> Result<(), CrdmeError> {
        let relative = self.consistency_error();
        if relative > tol {
            return Err(CrdmeError::ScheduleDrift {
                what: "incrementally maintained propensities vs dense rebuild".into(),
                relative,
            });
        }
        Ok(())
    }

    /// Draws the exponential waiting time to the next event without touching
    /// the state. Pair with [`Self::advance`] on an unchanged state.
    pub fn sample_waiting_time<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, CrdmeError> {
        let total = self.total_propensity();
        if !(total > 0.0) {
            return Err(CrdmeError::AbsorbingState(self.state.time));
        }
        let u: f64 = rng.gen();
        Ok(-(1.0 - u).ln() / total)
    }

    /// Advances the clock by `dt`, selects a channel proportionally to the
    /// current propensities, and applies it.
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        dt: f64,
        rng: &mut R,
    ) -> Result<Event, CrdmeError> {
        let total = self.total_propensity();
        if !(total > 0.0) {
            return Err(CrdmeError::AbsorbingState(self.state.time));
        }
        self.state.time += dt;
        let r = rng.gen::<f64>() * total;
        let hop = self.sched.hop_total();
        let event = if r < hop {
            self.execute_hop(r)
        } else {
            let r2 = r - hop;
            if r2 < self.sched.bind_total(&self.tables) {
                self.attempt_binding(rng)
            } else {
                self.attempt_unbinding(rng)
            }
        };
        if self.paranoid {
            self.check_consistency(PARANOID_TOL)?;
        }
        Ok(event)
    }

    /// One full event: waiting time plus channel execution.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<(Event, f64), CrdmeError> {
        let dt = self.sample_waiting_time(rng)?;
        let event = self.advance(dt, rng)?;
        Ok((event, dt))
    }

    /// Runs until every record time is passed and returns the state at each:
    /// the counts after the last event at or before that time.
    pub fn run_recording<R: Rng + ?Sized>(
        &mut self,
        record_times: &[f64],
        rng: &mut R,
    ) -> Result<Vec<Snapshot>, CrdmeError> {
        if record_times
            .iter()
            .any(|t| !t.is_finite() || *t < self.state.time)
        {
            return Err(CrdmeError::InvalidInput(
                "record times must be finite and not precede the current state time".into(),
            ));
        }
        if record_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(CrdmeError::InvalidInput(
                "record times must be sorted ascending".into(),
            ));
        }
        let mut out = Vec::with_capacity(record_times.len());
        let mut next = 0;
        while next < record_times.len() {
            let dt = match self.sample_waiting_time(rng) {
                Ok(dt) => dt,
                Err(CrdmeError::AbsorbingState(_)) => {
                    // Nothing will ever move again; every remaining record
                    // time sees the current state.
                    for &t in &record_times[next..] {
                        out.push(Snapshot {
                            time: t,
                            counts: self.state.counts.clone(),
                        });
                    }
                    self.state.time = record_times[record_times.len() - 1];
                    return Ok(out);
                }
                Err(e) => return Err(e),
            };
            let t_next = self.state.time + dt;
            while next < record_times.len() && record_times[next] < t_next {
                out.push(Snapshot {
                    time: record_times[next],
                    counts: self.state.counts.clone(),
                });
                next += 1;
            }
            if next >= record_times.len() {
                break;
            }
            self.advance(dt, rng)?;
        }
        Ok(out)
    }

    /// Applies one particle of species `s` appearing or vanishing at `node`
    /// to every incremental structure.
    fn change_count(&mut self, s: SpeciesId, node: usize, delta: i32) {
        debug_assert!(delta == 1 || delta == -1);
        let cnt = &mut self.state.counts[s.0][node];
        if delta >= 0 {
            *cnt += 1;
        } else {
            debug_assert!(*cnt >= 1);
            *cnt -= 1;
        }
        self.phi
            .apply_unit(&self.tables, s, node, delta > 0, &mut self.dirty);
        self.sched
            .apply_count_change(&self.tables, s, node, delta as f64);
    }

    /// Moves one particle of species `s` across an edge, marking one merged
    /// refresh span per species instead of two.
    fn move_particle(&mut self, s: SpeciesId, from: usize, to: usize) {
        debug_assert!(self.state.counts[s.0][from] > 0, "hop from an empty voxel");
        self.state.counts[s.0][from] -= 1;
        self.state.counts[s.0][to] += 1;
        self.phi
            .apply_move(&self.tables, s, from, to, &mut self.dirty);
        self.sched
            .apply_count_change(&self.tables, s, from, -1.0);
        self.sched.apply_count_change(&self.tables, s, to, 1.0);
    }

    fn flush_dirty(&mut self) {
        for st in 0..self.tables.n_species {
            let spans = self.dirty.take(st);
            for &(start, width) in &spans {
                self.sched.refresh_span(
                    &self.tables,
                    &self.phi,
                    &self.state.counts,
                    st,
                    start as usize,
                    width as usize,
                );
            }
            self.dirty.restore(st, spans);
        }
    }

    fn execute_hop(&mut self, target: f64) -> Event {
        let n = self.tables.n;
        let (leaf, rem) = self.sched.tree.locate(target);
        let e = leaf % n;
        let st = leaf / n;
        let r0 = self.sched.rate(leaf, 0);
        let r1 = self.sched.rate(leaf, 1);
        let dir = if rem < r0 || r1 <= 0.0 { 0 } else { 1 };
        let k1 = if e + 1 == n { 0 } else { e + 1 };
        let (from, to) = if dir == 0 { (e, k1) } else { (k1, e) };
        let s = SpeciesId(st);
        self.move_particle(s, from, to);
        self.flush_dirty();
        self.counters.hops += 1;
        Event::Hop { species: s, from, to }
    }

    /// Energy change of replacing the substrates A at node `i`, B at node
    /// `j` by a complex at node `z`, evaluated against the rest of the
    /// state. The phi fields cover the one-body terms and every pair
    /// interaction; what each substrate feels from itself and from its
    /// partner is subtracted explicitly.
    fn binding_exponent(&self, i: usize, j: usize, z: usize) -> f64 {
        let t = &self.tables;
        let g = t.gamma_f;
        let (a, b, c) = (t.a, t.b, t.c);
        let u_ab = t.u_between(a, b, i, j);
        let before = self.phi.get(a, i) - (t.u_at_offset(a, a, 0) + u_ab) / g
            + self.phi.get(b, j)
            - (t.u_at_offset(b, b, 0) + u_ab) / g;
        let after = self.phi.get(c, z)
            - (t.u_between(c, a, z, i) + t.u_between(c, b, z, j)) / g;
        after - before
    }

    /// Energy change of replacing a complex at node `k` by A at `xa` and B
    /// at `xb`. The fresh pair's mutual energy is absorbed in the placement
    /// weights, so it does not appear here.
    fn unbinding_exponent(&self, k: usize, xa: usize, xb: usize) -> f64 {
        let t = &self.tables;
        let g = t.gamma_f;
        let (a, b, c) = (t.a, t.b, t.c);
        let before = self.phi.get(c, k) - t.u_at_offset(c, c, 0) / g;
        let after = self.phi.get(a, xa) - t.u_between(a, c, xa, k) / g
            + self.phi.get(b, xb)
            - t.u_between(b, c, xb, k) / g;
        after - before
    }

    fn metropolis<R: Rng + ?Sized>(&self, exponent: f64, rng: &mut R) -> bool {
        let u: f64 = rng.gen();
        if exponent <= 0.0 {
            true
        } else {
            u < (-exponent).exp()
        }
    }

    fn attempt_binding<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Event {
        self.counters.binding_proposals += 1;
        let t = Arc::clone(&self.tables);
        let n = t.n;
        let na = &self.state.counts[t.a.0];
        // Voxel of the A substrate, by weight nA_i * w_i.
        let target = rng.gen::<f64>() * self.sched.s_bind.max(0.0);
        let mut i = usize::MAX;
        let mut last = usize::MAX;
        let mut acc = 0.0;
        for k in 0..n {
            if na[k] == 0 {
                continue;
            }
            let contrib = na[k] as f64 * self.sched.w[k].max(0.0);
            if contrib <= 0.0 {
                continue;
            }
            last = k;
            acc += contrib;
            if target < acc {
                i = k;
                break;
            }
        }
        if i == usize::MAX {
            i = last;
        }
        if i == usize::MAX {
            return Event::StaleProposal;
        }
        // Partner B voxel by weight K(i, j) * nB_j, against a freshly summed
        // normalizer so stale aggregates cannot bias the draw.
        let nb = &self.state.counts[t.b.0];
        let ks = t.k_support;
        let span_start = i as isize - ks as isize;
        let span_width = 2 * ks + 1;
        let mut wi = 0.0;
        for_span(n, span_start, span_width, |m| {
            if nb[m] > 0 {
                wi += t.k_row[t.offset(i, m)] * nb[m] as f64;
            }
        });
        if !(wi > 0.0) {
            return Event::StaleProposal;
        }
        let target2 = rng.gen::<f64>() * wi;
        let mut j = usize::MAX;
        let mut last_j = usize::MAX;
        let mut acc2 = 0.0;
        for_span(n, span_start, span_width, |m| {
            if j != usize::MAX || nb[m] == 0 {
                return;
            }
            let contrib = t.k_row[t.offset(i, m)] * nb[m] as f64;
            if contrib <= 0.0 {
                return;
            }
            last_j = m;
            acc2 += contrib;
            if target2 < acc2 {
                j = m;
            }
        });
        if j == usize::MAX {
            j = last_j;
        }
        // Product placement: coin flip between the substrate positions.
        let z = if rng.gen::<f64>() < 0.5 { i } else { j };
        let accepted = self.metropolis(self.binding_exponent(i, j, z), rng);
        if accepted {
            self.change_count(t.a, i, -1);
            self.change_count(t.b, j, -1);
            self.change_count(t.c, z, 1);
            self.flush_dirty();
            self.counters.bindings += 1;
        }
        Event::Binding {
            a_voxel: i,
            b_voxel: j,
            c_voxel: z,
            accepted,
        }
    }

    fn attempt_unbinding<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Event {
        self.counters.unbinding_proposals += 1;
        let t = Arc::clone(&self.tables);
        let n = t.n;
        if self.sched.total_c == 0 {
            return Event::StaleProposal;
        }
        // Complex voxel, uniformly per complex (integer weights, exact).
        let target = rng.gen::<f64>() * self.sched.total_c as f64;
        let nc = &self.state.counts[t.c.0];
        let mut k = usize::MAX;
        let mut last = usize::MAX;
        let mut acc = 0u64;
        for m in 0..n {
            if nc[m] == 0 {
                continue;
            }
            last = m;
            acc += nc[m] as u64;
            if target < acc as f64 {
                k = m;
                break;
            }
        }
        if k == usize::MAX {
            k = last;
        }
        // One product stays at the complex position, the other lands at an
        // offset drawn from the kernel-and-repulsion weights.
        let a_stays = rng.gen::<f64>() < 0.5;
        let offset = t.sample_unbind_offset(rng.gen::<f64>() * t.z_ab);
        let partner = {
            let p = k + offset;
            if p >= n {
                p - n
            } else {
                p
            }
        };
        let (xa, xb) = if a_stays { (k, partner) } else { (partner, k) };
        let accepted = self.metropolis(self.unbinding_exponent(k, xa, xb), rng);
        if accepted {
            self.change_count(t.c, k, -1);
            self.change_count(t.a, xa, 1);
            self.change_count(t.b, xb, 1);
            self.flush_dirty();
            self.counters.unbindings += 1;
        }
        Event::Unbinding {
            c_voxel: k,
            a_voxel: xa,
            b_voxel: xb,
            accepted,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_species, PairModel};
    use crate::state::initialize_particles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rdd_core::{
        acceptance_exponent, AcceptanceForm, KernelSpec, Mesh, PotentialTable,
        ReactionConfiguration, SystemScale,
    };
    use std::f64::consts::PI;

    fn busy_model(n: usize, gamma: usize) -> PairModel {
        let mesh = Mesh::new(2.0 * PI, n).unwrap();
        let kernel = KernelSpec::new(0.8, 2.0 * PI, 256).unwrap();
        let table = PotentialTable::harmonic(40.0, 3.0, vec![0.05, 0.05, 0.1]).unwrap();
        PairModel::reversible(mesh, default_species(), table, kernel, 4.0, 1.0, gamma).unwrap()
    }

    fn init(model: &PairModel, gamma: usize, seed: u64) -> (Simulator, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = vec![1.0; model.mesh.n_voxels()];
        let state =
            initialize_particles(&model.mesh, gamma, &profile, &profile, &mut rng).unwrap();
        (Simulator::new(model, state).unwrap(), rng)
    }

    #[test]
    fn stoichiometry_is_conserved_exactly() {
        let model = busy_model(24, 30);
        let (mut sim, mut rng) = init(&model, 30, 7);
        let na0 = sim.state.total(model.a) + sim.state.total(model.c);
        let nb0 = sim.state.total(model.b) + sim.state.total(model.c);
        for _ in 0..4000 {
            sim.step(&mut rng).unwrap();
            assert_eq!(sim.state.total(model.a) + sim.state.total(model.c), na0);
            assert_eq!(sim.state.total(model.b) + sim.state.total(model.c), nb0);
        }
        assert!(sim.counters.bindings > 10, "{:?}", sim.counters);
        assert!(sim.counters.unbindings > 10, "{:?}", sim.counters);
        assert!(sim.state.time > 0.0);
    }

    #[test]
    fn incremental_bookkeeping_survives_a_long_run() {
        let model = busy_model(24, 30);
        let (mut sim, mut rng) = init(&model, 30, 13);
        sim.set_paranoid(true);
        for _ in 0..1500 {
            sim.step(&mut rng).unwrap();
        }
        assert!(sim.consistency_error() < PARANOID_TOL);
    }

    #[test]
    fn same_seed_reproduces_the_run() {
        let model = busy_model(16, 20);
        let run = |seed: u64| {
            let (mut sim, mut rng) = init(&model, 20, seed);
            let mut events = Vec::new();
            for _ in 0..500 {
                events.push(sim.step(&mut rng).unwrap().0);
            }
            (events, sim.state.counts.clone(), sim.state.time)
        };
        let (e1, c1, t1) = run(42);
        let (e2, c2, t2) = run(42);
        assert_eq!(e1, e2);
        assert_eq!(c1, c2);
        assert_eq!(t1, t2);
        let (e3, ..) = run(43);
        assert_ne!(e1, e3);
    }

    #[test]
    fn fast_acceptance_exponents_match_the_clean_path() {
        let model = busy_model(16, 24);
        let (sim, mut rng) = init(&model, 24, 99);
        let scale = SystemScale::new(24.0);
        let mesh = &model.mesh;
        for _ in 0..200 {
            let i = rng.gen_range(0..16);
            let j = rng.gen_range(0..16);
            let z = if rng.gen_bool(0.5) { i } else { j };
            // Only configurations whose substrates exist are comparable.
            if sim.state.counts[0][i] == 0 || sim.state.counts[1][j] == 0 {
                continue;
            }
            let cfg = ReactionConfiguration {
                substrates: vec![(model.a, mesh.node(i)), (model.b, mesh.node(j))],
                products: vec![(model.c, mesh.node(z))],
                form: AcceptanceForm::Binding,
            };
            let clean =
                acceptance_exponent(&cfg, &sim.state.measure(), &model.table, scale).unwrap();
            let fast = sim.binding_exponent(i, j, z);
            assert!(
                (clean - fast).abs() < 1e-12 * (1.0 + clean.abs()),
                "binding at ({i},{j})->{z}: clean {clean}, fast {fast}"
            );
        }
    }

    #[test]
    fn fast_unbinding_exponent_matches_the_clean_path() {
        let model = busy_model(16, 24);
        let (mut sim, mut rng) = init(&model, 24, 5);
        // Run until a couple of complexes exist.
        for _ in 0..20_000 {
            sim.step(&mut rng).unwrap();
            if sim.state.total(model.c) >= 2 {
                break;
            }
        }
        let scale = SystemScale::new(24.0);
        let mesh = &model.mesh;
        let mut checked = 0;
        for k in 0..16 {
            if sim.state.counts[2][k] == 0 {
                continue;
            }
            for off in [0usize, 1, 7] {
                let xa = (k + off) % 16;
                let cfg = ReactionConfiguration {
                    substrates: vec![(model.c, mesh.node(k))],
                    products: vec![(model.a, mesh.node(xa)), (model.b, mesh.node(k))],
                    form: AcceptanceForm::Unbinding,
                };
                let clean =
                    acceptance_exponent(&cfg, &sim.state.measure(), &model.table, scale)
                        .unwrap();
                let fast = sim.unbinding_exponent(k, xa, k);
                assert!(
                    (clean - fast).abs() < 1e-12 * (1.0 + clean.abs()),
                    "unbinding at {k}->({xa},{k}): clean {clean}, fast {fast}"
                );
                checked += 1;
            }
        }
        assert!(checked > 0, "no complexes formed in the warmup run");
    }

    #[test]
    fn blocked_binding_is_always_rejected_and_changes_nothing() {
        let mesh = Mesh::new(2.0 * PI, 16).unwrap();
        let kernel = KernelSpec::new(0.8, 2.0 * PI, 256).unwrap();
        // A complex costs +50 in one-body energy: every binding proposal is
        // rejected (probability e^-50), so no complex can ever form.
        let table = PotentialTable::free(3).with_one_body(SpeciesId(2), |_| 50.0);
        let model = PairModel::reversible(
            mesh,
            default_species(),
            table,
            kernel,
            5.0,
            1.0,
            20,
        )
        .unwrap();
        let (mut sim, mut rng) = init(&model, 20, 3);
        let initial = sim.state.counts.clone();
        let mut proposals = 0;
        for _ in 0..2000 {
            match sim.step(&mut rng).unwrap().0 {
                Event::Binding { accepted, .. } => {
                    assert!(!accepted);
                    proposals += 1;
                }
                Event::Unbinding { .. } => panic!("no complex should exist"),
                _ => {}
            }
        }
        assert!(proposals > 5, "binding was never proposed");
        assert_eq!(sim.state.total(model.c), 0);
        // Rejections leave the species totals where hops put them.
        assert_eq!(
            initial[0].iter().sum::<u32>(),
            sim.state.counts[0].iter().sum::<u32>()
        );
    }

    #[test]
    fn downhill_binding_is_always_accepted() {
        let mesh = Mesh::new(2.0 * PI, 16).unwrap();
        let kernel = KernelSpec::new(0.8, 2.0 * PI, 256).unwrap();
        let table = PotentialTable::free(3).with_one_body(SpeciesId(2), |_| -50.0);
        let model = PairModel::reversible(
            mesh,
            default_species(),
            table,
            kernel,
            5.0,
            1.0,
            20,
        )
        .unwrap();
        let (mut sim, mut rng) = init(&model, 20, 4);
        for _ in 0..30_000 {
            if let Event::Binding { accepted, .. } = sim.step(&mut rng).unwrap().0 {
                assert!(accepted);
            }
            if sim.state.total(model.a) == 0 {
                break;
            }
        }
        // With a -50 energy bonus every A-B pair ends up bound.
        assert_eq!(sim.state.total(model.a), 0);
        assert_eq!(sim.state.total(model.c), 10);
    }

    #[test]
    fn empty_state_is_absorbing() {
        let model = busy_model(8, 10);
        let state = LatticeState::empty(model.mesh.clone(), 3, 10);
        let sim = Simulator::new(&model, state).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sim.sample_waiting_time(&mut rng),
            Err(CrdmeError::AbsorbingState(_))
        ));
    }

    #[test]
    fn recording_lands_on_the_requested_grid() {
        let model = busy_model(16, 20);
        let (mut sim, mut rng) = init(&model, 20, 21);
        let times = [0.0, 0.05, 0.1, 0.2];
        let snaps = sim.run_recording(&times, &mut rng).unwrap();
        assert_eq!(snaps.len(), 4);
        for (snap, &t) in snaps.iter().zip(times.iter()) {
            assert_eq!(snap.time, t);
            let total: u32 = snap.counts.iter().flatten().sum();
            assert!(total > 0);
        }
        // The first snapshot is the untouched initial condition.
        assert_eq!(snaps[0].counts[2], vec![0; 16]);
        // Unsorted grids are rejected.
        assert!(sim.run_recording(&[1.0, 0.5], &mut rng).is_err());
    }

    #[test]
    fn absorbing_recording_fills_remaining_times() {
        let model = busy_model(8, 10);
        let state = LatticeState::empty(model.mesh.clone(), 3, 10);
        let mut sim = Simulator::new(&model, state).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let snaps = sim.run_recording(&[0.5, 1.0], &mut rng).unwrap();
        assert_eq!(snaps.len(), 2);
        assert!(snaps.iter().all(|s| s.counts.iter().flatten().all(|&c| c == 0)));
        assert_eq!(sim.state.time, 1.0);
    }

    #[test]
    #[ignore = "timing probe; run with --ignored --nocapture to size ensembles"]
    fn event_throughput_probe() {
        let n: usize = std::env::var("PROBE_VOXELS")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(64);
        let gamma: usize = std::env::var("PROBE_GAMMA")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(200);
        let mesh = Mesh::new(2.0 * PI, n).unwrap();
        let kernel = KernelSpec::new(0.15, 2.0 * PI, 256).unwrap();
        let table = PotentialTable::harmonic(200.0, 3.0, vec![0.05, 0.05, 0.1]).unwrap();
        let model =
            PairModel::reversible(mesh, default_species(), table, kernel, 1.0, 0.05, gamma)
                .unwrap();
        let profile_a: Vec<f64> = model
            .mesh
            .nodes()
            .map(|x| (-5.0 * (x - 0.75 * PI).powi(2)).exp())
            .collect();
        let profile_b: Vec<f64> = model
            .mesh
            .nodes()
            .map(|x| (-5.0 * (x - 1.25 * PI).powi(2)).exp())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state =
            initialize_particles(&model.mesh, gamma, &profile_a, &profile_b, &mut rng).unwrap();
        let mut sim = Simulator::new(&model, state).unwrap();
        let events = 400_000usize;
        let start = std::time::Instant::now();
        for _ in 0..events {
            sim.step(&mut rng).unwrap();
        }
        let dt = start.elapsed().as_secs_f64();
        println!(
            "{events} events in {dt:.3} s ({:.0} events/s), reached t = {:.3}, counters {:?}",
            events as f64 / dt,
            sim.state.time,
            sim.counters
        );
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let model = busy_model(16, 20);
        let other_mesh = Mesh::new(2.0 * PI, 8).unwrap();
        let state = LatticeState::empty(other_mesh, 3, 20);
        assert!(Simulator::new(&model, state).is_err());
        let wrong_gamma = LatticeState::empty(model.mesh.clone(), 3, 10);
        assert!(Simulator::new(&model, wrong_gamma).is_err());
    }
}
