//! Lattice occupancy state and initial sampling.

use rand::Rng;
use rdd_core::{Mesh, SpeciesId};

use crate::error::CrdmeError;

/// Voxel counts for every species at one instant. Together with the scale
/// `gamma` this encodes the concentration measure `counts / gamma` used by
/// energies and acceptance probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeState {
    pub mesh: Mesh,
    /// `counts[species][voxel]`
    pub counts: Vec<Vec<u32>>,
    pub gamma: usize,
    pub time: f64,
}

impl LatticeState {
    pub fn empty(mesh: Mesh, n_species: usize, gamma: usize) -> Self {
        let n = mesh.n_voxels();
        LatticeState {
            mesh,
            counts: vec![vec![0; n]; n_species],
            gamma,
            time: 0.0,
        }
    }

    pub fn gamma_f(&self) -> f64 {
        self.gamma as f64
    }

    pub fn total(&self, s: SpeciesId) -> u64 {
        self.counts[s.0].iter().map(|&c| c as u64).sum()
    }

    pub fn measure(&self) -> rdd_core::LatticeMeasure<'_> {
        rdd_core::LatticeMeasure {
            mesh: &self.mesh,
            counts: &self.counts,
            gamma: self.gamma_f(),
        }
    }
}

/// Samples the initial A and B populations, `gamma / 2` particles each,
/// i.i.d. from the discrete distributions proportional to the profile values
/// at the mesh nodes. C starts empty.
pub fn initialize_particles<R: Rng + ?Sized>(
    mesh: &Mesh,
    gamma: usize,
    profile_a: &[f64],
    profile_b: &[f64],
    rng: &mut R,
) -> Result<LatticeState, CrdmeError> {
    if gamma < 2 || gamma % 2 != 0 {
        return Err(CrdmeError::InvalidInput(format!(
            "gamma must be a positive even integer, got {gamma}"
        )));
    }
    let n = mesh.n_voxels();
    let mut state = LatticeState::empty(mesh.clone(), 3, gamma);
    for (species, profile) in [(0usize, profile_a), (1, profile_b)] {
        let cdf = profile_cdf(profile, n)?;
        for _ in 0..gamma / 2 {
            let voxel = sample_cdf(&cdf, rng);
            state.counts[species][voxel] += 1;
        }
    }
    Ok(state)
}

fn profile_cdf(profile: &[f64], n: usize) -> Result<Vec<f64>, CrdmeError> {
    if profile.len() != n {
        return Err(CrdmeError::InvalidInput(format!(
            "profile has {} values for a {n}-voxel mesh",
            profile.len()
        )));
    }
    if profile.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(CrdmeError::InvalidInput(
            "initial profile values must be finite and nonnegative".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &p in profile {
        acc += p;
        cdf.push(acc);
    }
    if acc <= 0.0 {
        return Err(CrdmeError::InvalidInput(
            "initial profile has zero total mass".into(),
        ));
    }
    Ok(cdf)
}

fn sample_cdf<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let target = rng.gen::<f64>() * cdf[cdf.len() - 1];
    sample_cumulative(cdf, target)
}

/// Index of the bin holding `target` under the cumulative weights `cdf`.
pub(crate) fn sample_cumulative(cdf: &[f64], target: f64) -> usize {
    // First bin whose cumulative weight exceeds the target; this skips
    // zero-weight bins even when the target ties their cumulative value.
    let mut i = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
    // Rounding can push the target onto the far edge; back off zero-weight bins.
    while i > 0 && cdf[i] == cdf[i - 1] {
        i -= 1;
    }
    i
}
