//! Precomputed per-model lookup tables for the event loop.
//!
//! On a periodic uniform mesh every quantity the hot path needs — pair
//! potentials between nodes, kernel values, backward placement weights — is
//! translation invariant, so one row per species pair indexed by ring offset
//! covers all node pairs. Rows are stored full length and symmetric in
//! `d <-> n - d`, so callers can index by the raw offset without folding.

use rdd_core::SpeciesId;

use crate::error::CrdmeError;
use crate::model::PairModel;
use crate::state::sample_cumulative;

/// Calls `f` on `width` consecutive ring indices starting at `start`
/// (wrapped), visiting each index at most once.
#[inline]
pub(crate) fn for_span(n: usize, start: isize, width: usize, mut f: impl FnMut(usize)) {
    let w = width.min(n);
    let s = start.rem_euclid(n as isize) as usize;
    for i in 0..w {
        let k = s + i;
        f(if k >= n { k - n } else { k });
    }
}

#[derive(Clone, Debug)]
pub struct ModelTables {
    pub n: usize,
    pub h: f64,
    pub n_species: usize,
    pub a: SpeciesId,
    pub b: SpeciesId,
    pub c: SpeciesId,
    /// `u_rows[s][t][d]`: pair potential between species `s` and `t` at ring
    /// offset `d`.
    u_rows: Vec<Vec<Vec<f64>>>,
    /// `exp(u_rows / gamma)` and its reciprocal: multiplicative field updates
    /// when a particle appears or vanishes.
    exp_add: Vec<Vec<Vec<f64>>>,
    exp_sub: Vec<Vec<Vec<f64>>>,
    /// Largest offset (at most `n / 2`) where `u_rows[s][t]` is nonzero.
    support: Vec<Vec<usize>>,
    /// Per species: the widest support against any partner species.
    max_support: Vec<usize>,
    /// Binding kernel at ring offset.
    pub k_row: Vec<f64>,
    /// Largest offset (at most `n / 2`) where the kernel row is nonzero.
    pub k_support: usize,
    /// External one-body potential per species at the mesh nodes.
    pub one_body: Vec<Vec<f64>>,
    /// Unnormalized backward placement weights `h * K * exp(-u_AB / gamma)`
    /// by partner offset, their cumulative sums, and the normalizer.
    pub unbind_weights: Vec<f64>,
    unbind_cdf: Vec<f64>,
    pub z_ab: f64,
    /// `D_s / h^2` per species.
    pub d_over_h2: Vec<f64>,
    /// `(u_ss(h) - u_ss(0)) / gamma` per species: the moving particle's own
    /// contribution to a nearest-neighbor energy difference.
    pub self_corr: Vec<f64>,
    /// `exp(-self_corr)` per species: turns a ratio of nodal Boltzmann
    /// factors into the forward hop exponential.
    pub exp_neg_self: Vec<f64>,
    /// `exp(-2 * self_corr)` per species. With it, one exponential per edge
    /// serves both hop directions: if `g = exp(delta_fwd)` then
    /// `exp(delta_bwd) = exp_neg_two_self / g`.
    pub exp_neg_two_self: Vec<f64>,
    /// `lambda / gamma`: proposal rate prefactor of one A-B pair.
    pub bind_pref: f64,
    pub mu: f64,
    pub gamma_f: f64,
}

impl ModelTables {
    pub fn build(model: &PairModel) -> Result<Self, CrdmeError> {
        let n = model.mesh.n_voxels();
        let h = model.mesh.spacing();
        let n_species = model.n_species();
        let gamma_f = model.gamma as f64;
        if model.gamma == 0 {
            return Err(CrdmeError::InvalidInput("gamma must be positive".into()));
        }

        let mut u_rows = vec![vec![vec![0.0; n]; n_species]; n_species];
        let mut support = vec![vec![0usize; n_species]; n_species];
        for s in 0..n_species {
            for t in 0..n_species {
                for d in 0..n {
                    let dist = model.mesh.node_distance(0, d);
                    u_rows[s][t][d] = model.table.pair(SpeciesId(s), SpeciesId(t), dist);
                }
                support[s][t] = (1..=n / 2)
                    .filter(|&d| u_rows[s][t][d] != 0.0)
                    .max()
                    .unwrap_or(0);
            }
        }
        let max_support = (0..n_species)
            .map(|t| (0..n_species).map(|s| support[s][t]).max().unwrap())
            .collect();
        let exp_add: Vec<Vec<Vec<f64>>> = u_rows
            .iter()
            .map(|by_t| {
                by_t.iter()
                    .map(|row| row.iter().map(|&u| (u / gamma_f).exp()).collect())
                    .collect()
            })
            .collect();
        let exp_sub = u_rows
            .iter()
            .map(|by_t| {
                by_t.iter()
                    .map(|row| row.iter().map(|&u| (-u / gamma_f).exp()).collect())
                    .collect()
            })
            .collect();

        let k_row: Vec<f64> = (0..n)
            .map(|d| model.kernel.eval_distance(model.mesh.node_distance(0, d)))
            .collect();
        let k_support = (1..=n / 2).filter(|&d| k_row[d] != 0.0).max().unwrap_or(0);

        let one_body = (0..n_species)
            .map(|s| {
                (0..n)
                    .map(|k| model.table.one_body(SpeciesId(s), model.mesh.node(k)))
                    .collect()
            })
            .collect();

        let ab_row = &u_rows[model.a.0][model.b.0];
        let unbind_weights: Vec<f64> = (0..n)
            .map(|d| h * k_row[d] * (-ab_row[d] / gamma_f).exp())
            .collect();
        let mut unbind_cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &w in &unbind_weights {
            acc += w;
            unbind_cdf.push(acc);
        }
        let z_ab = acc;
        if !(z_ab.is_finite() && z_ab > 0.0) {
            return Err(CrdmeError::InvalidInput(format!(
                "backward placement weights sum to {z_ab}; the kernel puts no \
                 mass on this mesh"
            )));
        }

        let d_over_h2 = model
            .species
            .iter()
            .map(|sp| sp.diffusivity / (h * h))
            .collect();
        let self_corr: Vec<f64> = (0..n_species)
            .map(|s| (u_rows[s][s][1 % n] - u_rows[s][s][0]) / gamma_f)
            .collect();
        let exp_neg_self = self_corr.iter().map(|&c| (-c).exp()).collect();
        let exp_neg_two_self = self_corr.iter().map(|&c| (-2.0 * c).exp()).collect();

        Ok(ModelTables {
            n,
            h,
            n_species,
            a: model.a,
            b: model.b,
            c: model.c,
            u_rows,
            exp_add,
            exp_sub,
            support,
            max_support,
            k_row,
            k_support,
            one_body,
            unbind_weights,
            unbind_cdf,
            z_ab,
            d_over_h2,
            self_corr,
            exp_neg_self,
            exp_neg_two_self,
            bind_pref: model.lambda / gamma_f,
            mu: model.mu,
            gamma_f,
        })
    }

    /// Ring offset `(i - j) mod n`.
    #[inline]
    pub fn offset(&self, i: usize, j: usize) -> usize {
        let d = i.wrapping_sub(j);
        if i >= j {
            d
        } else {
            d.wrapping_add(self.n)
        }
    }

    /// Pair potential between a species-`s` particle at node `i` and a
    /// species-`t` particle at node `j`.
    #[inline]
    pub fn u_between(&self, s: SpeciesId, t: SpeciesId, i: usize, j: usize) -> f64 {
        self.u_rows[s.0][t.0][self.offset(i, j)]
    }

    #[inline]
    pub fn u_at_offset(&self, s: SpeciesId, t: SpeciesId, d: usize) -> f64 {
        self.u_rows[s.0][t.0][d]
    }

    /// Full potential row of species `s` against species `t`, indexed by
    /// ring offset.
    #[inline]
    pub fn u_row(&self, s: SpeciesId, t: SpeciesId) -> &[f64] {
        &self.u_rows[s.0][t.0]
    }

    /// Row of multiplicative Boltzmann-factor updates for species `s` when a
    /// species-`t` particle appears (`add = true`) or vanishes.
    #[inline]
    pub fn exp_row(&self, s: SpeciesId, t: SpeciesId, add: bool) -> &[f64] {
        if add {
            &self.exp_add[s.0][t.0]
        } else {
            &self.exp_sub[s.0][t.0]
        }
    }

    #[inline]
    pub fn support(&self, s: SpeciesId, t: SpeciesId) -> usize {
        self.support[s.0][t.0]
    }

    /// Widest pair-potential support any species feels from species `t`.
    #[inline]
    pub fn max_support(&self, t: SpeciesId) -> usize {
        self.max_support[t.0]
    }

    /// Kernel value between nodes `i` and `j`.
    #[inline]
    pub fn kernel_between(&self, i: usize, j: usize) -> f64 {
        self.k_row[self.offset(i, j)]
    }

    /// Draws a partner offset from the backward placement weights. `target`
    /// must lie in `[0, z_ab)`.
    #[inline]
    pub fn sample_unbind_offset(&self, target: f64) -> usize {
        sample_cumulative(&self.unbind_cdf, target)
    }
}
