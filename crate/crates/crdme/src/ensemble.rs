//! Replicated trajectories with bit-reproducible statistics.
//!
//! Every replicate gets its own counter-based RNG stream derived from the
//! base seed and the replicate index, so trajectories do not depend on how
//! work is distributed. Statistics are accumulated as exact integer sums of
//! voxel counts and their squares; integer addition commutes, so the final
//! figures are identical for any worker count or scheduling order.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rdd_core::SpeciesId;

use crate::error::CrdmeError;
use crate::model::PairModel;
use crate::simulator::{Simulator, Snapshot};
use crate::state::initialize_particles;
use crate::tables::ModelTables;

#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec<'a> {
    pub model: &'a PairModel,
    /// Initial placement weights for A at the mesh nodes.
    pub profile_a: &'a [f64],
    /// Initial placement weights for B at the mesh nodes.
    pub profile_b: &'a [f64],
    pub record_times: &'a [f64],
    pub replicates: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses the library default.
    pub workers: usize,
}

/// Exact integer sums over replicates, with derived means and standard
/// errors.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    pub record_times: Vec<f64>,
    pub n_voxels: usize,
    pub n_species: usize,
    pub spacing: f64,
    pub gamma: f64,
    pub replicates: usize,
    pub base_seed: u64,
    /// `[time][species][voxel]` sums of counts, flattened.
    counts: Vec<u64>,
    /// Same layout, sums of squared counts.
    squares: Vec<u64>,
    /// `[time][species]` sums of per-replicate species totals.
    totals: Vec<u64>,
    total_squares: Vec<u64>,
}

impl EnsembleStats {
    #[inline]
    fn voxel_idx(&self, t: usize, s: usize, k: usize) -> usize {
        (t * self.n_species + s) * self.n_voxels + k
    }

    /// Sample mean and standard error of the mean from integer sums.
    fn mean_se(sum: u64, sum_sq: u64, r: usize) -> (f64, f64) {
        let rf = r as f64;
        let mean = sum as f64 / rf;
        if r < 2 {
            return (mean, 0.0);
        }
        let var = ((sum_sq as f64) - (sum as f64) * mean).max(0.0) / (rf - 1.0);
        (mean, (var / rf).sqrt())
    }

    /// Ensemble mean of the concentration `count / (h * gamma)` in a voxel.
    pub fn mean_concentration(&self, t: usize, s: SpeciesId, k: usize) -> f64 {
        let i = self.voxel_idx(t, s.0, k);
        let (mean, _) = Self::mean_se(self.counts[i], self.squares[i], self.replicates);
        mean / (self.spacing * self.gamma)
    }

    pub fn se_concentration(&self, t: usize, s: SpeciesId, k: usize) -> f64 {
        let i = self.voxel_idx(t, s.0, k);
        let (_, se) = Self::mean_se(self.counts[i], self.squares[i], self.replicates);
        se / (self.spacing * self.gamma)
    }

    /// Ensemble mean of the species molar mass `total / gamma`.
    pub fn mean_molar_mass(&self, t: usize, s: SpeciesId) -> f64 {
        let i = t * self.n_species + s.0;
        let (mean, _) = Self::mean_se(self.totals[i], self.total_squares[i], self.replicates);
        mean / self.gamma
    }

    pub fn se_molar_mass(&self, t: usize, s: SpeciesId) -> f64 {
        let i = t * self.n_species + s.0;
        let (_, se) = Self::mean_se(self.totals[i], self.total_squares[i], self.replicates);
        se / self.gamma
    }

    /// `(time, mean, standard error)` of the molar mass at every record
    /// time.
    pub fn molar_mass_series(&self, s: SpeciesId) -> Vec<(f64, f64, f64)> {
        (0..self.record_times.len())
            .map(|t| {
                (
                    self.record_times[t],
                    self.mean_molar_mass(t, s),
                    self.se_molar_mass(t, s),
                )
            })
            .collect()
    }

    pub fn concentration_profile(&self, t: usize, s: SpeciesId) -> Vec<f64> {
        (0..self.n_voxels)
            .map(|k| self.mean_concentration(t, s, k))
            .collect()
    }

    /// Raw integer accumulators; exposed so determinism can be asserted
    /// bitwise.
    pub fn raw_sums(&self) -> (&[u64], &[u64], &[u64], &[u64]) {
        (&self.counts, &self.squares, &self.totals, &self.total_squares)
    }
}

#[derive(Clone)]
struct Accumulator {
    counts: Vec<u64>,
    squares: Vec<u64>,
    totals: Vec<u64>,
    total_squares: Vec<u64>,
}

impl Accumulator {
    fn new(n_times: usize, n_species: usize, n_voxels: usize) -> Self {
        Accumulator {
            counts: vec![0; n_times * n_species * n_voxels],
            squares: vec![0; n_times * n_species * n_voxels],
            totals: vec![0; n_times * n_species],
            total_squares: vec![0; n_times * n_species],
        }
    }

    fn absorb(&mut self, snaps: &[Snapshot], n_species: usize, n_voxels: usize) {
        for (t, snap) in snaps.iter().enumerate() {
            for (s, row) in snap.counts.iter().enumerate() {
                let base = (t * n_species + s) * n_voxels;
                let mut total = 0u64;
                for (k, &c) in row.iter().enumerate() {
                    let c = c as u64;
                    self.counts[base + k] += c;
                    self.squares[base + k] += c * c;
                    total += c;
                }
                self.totals[t * n_species + s] += total;
                self.total_squares[t * n_species + s] += total * total;
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        for (a, b) in self.squares.iter_mut().zip(other.squares) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(other.totals) {
            *a += b;
        }
        for (a, b) in self.total_squares.iter_mut().zip(other.total_squares) {
            *a += b;
        }
        self
    }
}

pub fn run_ensemble(spec: &EnsembleSpec<'_>) -> Result<EnsembleStats, CrdmeError> {
    if spec.replicates == 0 {
        return Err(CrdmeError::InvalidInput(
            "an ensemble needs at least one replicate".into(),
        ));
    }
    let tables = Arc::new(ModelTables::build(spec.model)?);
    let n_times = spec.record_times.len();
    let (ns, n) = (tables.n_species, tables.n);

    let body = || -> Result<Accumulator, CrdmeError> {
        (0..spec.replicates)
            .into_par_iter()
            .try_fold(
                || Accumulator::new(n_times, ns, n),
                |mut acc, rep| -> Result<Accumulator, CrdmeError> {
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.base_seed);
                    rng.set_stream(rep as u64);
                    let state = initialize_particles(
                        &spec.model.mesh,
                        spec.model.gamma,
                        spec.profile_a,
                        spec.profile_b,
                        &mut rng,
                    )?;
                    let mut sim = Simulator::with_tables(Arc::clone(&tables), state)?;
                    let snaps = sim.run_recording(spec.record_times, &mut rng)?;
                    acc.absorb(&snaps, ns, n);
                    Ok(acc)
                },
            )
            .try_reduce(|| Accumulator::new(n_times, ns, n), |a, b| Ok(a.merge(b)))
    };

    let acc = if spec.workers == 0 {
        body()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| CrdmeError::InvalidInput(format!("worker pool: {e}")))?;
        pool.install(body)?
    };

    Ok(EnsembleStats {
        record_times: spec.record_times.to_vec(),
        n_voxels: n,
        n_species: ns,
        spacing: tables.h,
        gamma: tables.gamma_f,
        replicates: spec.replicates,
        base_seed: spec.base_seed,
        counts: acc.counts,
        squares: acc.squares,
        totals: acc.totals,
        total_squares: acc.total_squares,
    })
}
