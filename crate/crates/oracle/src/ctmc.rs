//! Exact continuous-time Markov chains for tiny lattice instances.
//!
//! The full reachable state space of a closed `A + B <-> C` system is
//! enumerated from the conserved totals, the dense generator is assembled
//! channel by channel from the same rate and acceptance formulas the
//! simulator realizes stochastically, and distributions come from two
//! independent matrix-exponential methods (scaled-and-squared Taylor series;
//! uniformization) that tests require to agree.

use std::collections::HashMap;

use rdd_core::{
    acceptance_probability, backward_placement_distribution, AcceptanceForm,
    ReactionConfiguration, SystemScale,
};
use rdd_crdme::{binding_proposal_rate, hop_delta, hop_rate, LatticeState, PairModel};

use crate::error::OracleError;

/// Hard ceiling on the enumerated state count.
pub const STATE_CAP: usize = 100_000;

#[derive(Clone, Debug)]
pub struct MicroCTMC {
    /// Flattened occupancies, species-major (`[A voxels..., B voxels..., C
    /// voxels...]`), in lexicographic order; this fixes the row and column
    /// indexing of the generator.
    pub states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// Dense generator, row-major. Rows sum to zero exactly: each diagonal
    /// is the negated sum of its stored off-diagonals.
    q: Vec<f64>,
    pub n_states: usize,
    n_voxels: usize,
}

/// Enumerates all placements of `total` indistinguishable particles into
/// `parts` voxels, in lexicographic order.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0u32; parts];
    fn recurse(slot: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slot + 1 == current.len() {
            current[slot] = remaining;
            out.push(current.clone());
            return;
        }
        for here in 0..=remaining {
            current[slot] = here;
            recurse(slot + 1, remaining - here, current, out);
        }
    }
    recurse(0, total, &mut current, &mut out);
    out
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Builds the exact chain for the closed system containing the given
/// occupancy: every state sharing its conserved totals `N_A + N_C` and
/// `N_B + N_C`, with generator entries for hops and for accepted
/// binding/unbinding proposals.
pub fn build_micro_ctmc(
    model: &PairModel,
    initial: &[Vec<u32>],
) -> Result<MicroCTMC, OracleError> {
    let m = model.mesh.n_voxels();
    if initial.len() != 3 || initial.iter().any(|row| row.len() != m) {
        return Err(OracleError::InvalidInput(format!(
            "occupancy must be 3 species rows of {m} voxels"
        )));
    }
    let total = |s: usize| -> u32 { initial[s].iter().sum() };
    let alpha = total(0) + total(2);
    let beta = total(1) + total(2);

    // Count before enumerating so an oversized request fails fast.
    let mut predicted: u128 = 0;
    for nc in 0..=alpha.min(beta) {
        let place = |t: u32| binomial((t + m as u32 - 1) as u64, (m - 1) as u64);
        predicted += place(alpha - nc) * place(beta - nc) * place(nc);
    }
    if predicted > STATE_CAP as u128 {
        return Err(OracleError::StateSpaceOverflow(predicted as usize));
    }

    let mut states = Vec::with_capacity(predicted as usize);
    for nc in 0..=alpha.min(beta) {
        for a_row in compositions(alpha - nc, m) {
            for b_row in compositions(beta - nc, m) {
                for c_row in compositions(nc, m) {
                    let mut flat = Vec::with_capacity(3 * m);
                    flat.extend_from_slice(&a_row);
                    flat.extend_from_slice(&b_row);
                    flat.extend_from_slice(&c_row);
                    states.push(flat);
                }
            }
        }
    }
    states.sort_unstable();
    let index: HashMap<Vec<u32>, usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();

    let n_states = states.len();
    let mut q = vec![0.0; n_states * n_states];
    let scale = SystemScale::new(model.gamma as f64);
    let h = model.mesh.spacing();
    let backward = backward_placement_distribution(
        model.mesh.node(0),
        &model.mesh,
        &model.kernel,
        &model.table,
        (model.a, model.b),
        scale,
    )?;

    let mut state = LatticeState::empty(model.mesh.clone(), 3, model.gamma);
    for (row_idx, flat) in states.iter().enumerate() {
        for s in 0..3 {
            state.counts[s].copy_from_slice(&flat[s * m..(s + 1) * m]);
        }
        let add = |flat_to: Vec<u32>, rate: f64, q: &mut Vec<f64>| {
            if rate > 0.0 {
                let col = index[&flat_to];
                q[row_idx * n_states + col] += rate;
            }
        };

        // Hops: each occupied voxel feeds both neighbors; on two voxels the
        // neighbors coincide and the doubled edge is intentional.
        for s in 0..3 {
            let sid = rdd_core::SpeciesId(s);
            let d_s = model.diffusivity(sid);
            for i in 0..m {
                let cnt = state.counts[s][i];
                if cnt == 0 {
                    continue;
                }
                for j in [(i + 1) % m, (i + m - 1) % m] {
                    let delta = hop_delta(&state, sid, i, j, &model.table, scale);
                    let rate = cnt as f64 * hop_rate(d_s, h, delta);
                    let mut to = flat.clone();
                    to[s * m + i] -= 1;
                    to[s * m + j] += 1;
                    add(to, rate, &mut q);
                }
            }
        }

        // Binding proposals, thinned by the acceptance probability; the
        // complex lands on either substrate voxel with probability 1/2.
        if model.lambda > 0.0 {
            for i in 0..m {
                let na = state.counts[model.a.0][i];
                if na == 0 {
                    continue;
                }
                for j in 0..m {
                    let nb = state.counts[model.b.0][j];
                    if nb == 0 {
                        continue;
                    }
                    let pair_rate = na as f64
                        * nb as f64
                        * binding_proposal_rate(
                            model.lambda,
                            &model.kernel,
                            scale,
                            model.mesh.node(i),
                            model.mesh.node(j),
                        );
                    if pair_rate == 0.0 {
                        continue;
                    }
                    for z in [i, j] {
                        let cfg = ReactionConfiguration {
                            substrates: vec![
                                (model.a, model.mesh.node(i)),
                                (model.b, model.mesh.node(j)),
                            ],
                            products: vec![(model.c, model.mesh.node(z))],
                            form: AcceptanceForm::Binding,
                        };
                        let pi =
                            acceptance_probability(&cfg, &state.measure(), &model.table, scale)?;
                        let mut to = flat.clone();
                        to[model.a.0 * m + i] -= 1;
                        to[model.b.0 * m + j] -= 1;
                        to[model.c.0 * m + z] += 1;
                        add(to, pair_rate * 0.5 * pi, &mut q);
                    }
                }
            }
        }

        // Unbinding proposals: rate mu per complex, split over which product
        // stays and the partner voxel drawn from the placement weights.
        if model.mu > 0.0 {
            for k in 0..m {
                let nc = state.counts[model.c.0][k];
                if nc == 0 {
                    continue;
                }
                for (offset, &weight) in backward.weights.iter().enumerate() {
                    if weight == 0.0 {
                        continue;
                    }
                    let partner = (k + offset) % m;
                    let frac = weight / backward.normalizer;
                    for a_stays in [true, false] {
                        let (xa, xb) = if a_stays { (k, partner) } else { (partner, k) };
                        let cfg = ReactionConfiguration {
                            substrates: vec![(model.c, model.mesh.node(k))],
                            products: vec![
                                (model.a, model.mesh.node(xa)),
                                (model.b, model.mesh.node(xb)),
                            ],
                            form: AcceptanceForm::Unbinding,
                        };
                        let pi =
                            acceptance_probability(&cfg, &state.measure(), &model.table, scale)?;
                        let mut to = flat.clone();
                        to[model.c.0 * m + k] -= 1;
                        to[model.a.0 * m + xa] += 1;
                        to[model.b.0 * m + xb] += 1;
                        add(to, nc as f64 * model.mu * 0.5 * frac * pi, &mut q);
                    }
                }
            }
        }
    }

    for row in 0..n_states {
        let mut out_rate = 0.0;
        for col in 0..n_states {
            if col != row {
                out_rate += q[row * n_states + col];
            }
        }
        q[row * n_states + row] = -out_rate;
    }

    Ok(MicroCTMC {
        states,
        index,
        q,
        n_states,
        n_voxels: m,
    })
}

impl MicroCTMC {
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.q[from * self.n_states + to]
    }

    /// Index of an occupancy in the lexicographic state order.
    pub fn state_index(&self, counts: &[Vec<u32>]) -> Option<usize> {
        let mut flat = Vec::with_capacity(3 * self.n_voxels);
        for row in counts {
            flat.extend_from_slice(row);
        }
        self.index.get(&flat).copied()
    }

    /// Point mass on the given occupancy.
    pub fn initial_distribution(&self, counts: &[Vec<u32>]) -> Result<Vec<f64>, OracleError> {
        let idx = self.state_index(counts).ok_or_else(|| {
            OracleError::InvalidInput("occupancy is not a state of this chain".into())
        })?;
        let mut p = vec![0.0; self.n_states];
        p[idx] = 1.0;
        Ok(p)
    }

    /// `p(t) = p(0) exp(Q t)` through a scaled-and-squared Taylor series on
    /// the dense matrix.
    pub fn distribution(&self, p0: &[f64], t: f64) -> Result<Vec<f64>, OracleError> {
        self.check_distribution(p0, t)?;
        let s = self.n_states;
        let mut a: Vec<f64> = self.q.iter().map(|&x| x * t).collect();
        let norm = inf_norm(&a, s);
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let factor = 0.5f64.powi(squarings as i32);
        for x in &mut a {
            *x *= factor;
        }
        // Taylor series of exp(a) with ||a|| <= 1/2: terms decay at least
        // geometrically with ratio 1/2 past the first, so 40 terms bound the
        // truncation far below the 1e-12 target.
        let mut result = identity(s);
        let mut term = identity(s);
        for order in 1..=40 {
            term = mat_mul(&term, &a, s);
            let scale = 1.0 / order as f64;
            for x in &mut term {
                *x *= scale;
            }
            for (r, &x) in result.iter_mut().zip(term.iter()) {
                *r += x;
            }
            if inf_norm(&term, s) < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = mat_mul(&result, &result, s);
        }
        Ok(vec_mat(p0, &result, s))
    }

    /// `p(t)` by uniformization: a Poisson mixture over powers of the
    /// stochastic matrix `I + Q / rate_bound`. Independent of
    /// [`Self::distribution`] except for the generator itself.
    pub fn distribution_uniformized(&self, p0: &[f64], t: f64) -> Result<Vec<f64>, OracleError> {
        self.check_distribution(p0, t)?;
        let s = self.n_states;
        let lam = (0..s)
            .map(|i| -self.q[i * s + i])
            .fold(0.0f64, f64::max);
        if lam * t == 0.0 {
            return Ok(p0.to_vec());
        }
        // Keep the leading Poisson weight representable.
        if lam * t > 600.0 {
            let half = self.distribution_uniformized(p0, t / 2.0)?;
            return self.distribution_uniformized(&half, t / 2.0);
        }
        let mut weight = (-lam * t).exp();
        let mut covered = weight;
        let mut v = p0.to_vec();
        let mut acc: Vec<f64> = v.iter().map(|&x| x * weight).collect();
        let mut m = 0u64;
        while covered < 1.0 - 1e-14 && m < 100_000 {
            m += 1;
            // v <- v (I + Q/lam)
            let vq = vec_mat(&v, &self.q, s);
            for (vi, qi) in v.iter_mut().zip(vq.iter()) {
                *vi += qi / lam;
            }
            weight *= lam * t / m as f64;
            covered += weight;
            for (a, &x) in acc.iter_mut().zip(v.iter()) {
                *a += weight * x;
            }
        }
        Ok(acc)
    }

    /// Stationary distribution from the linear system `pi Q = 0`,
    /// `sum pi = 1`, by dense Gaussian elimination.
    pub fn stationary(&self) -> Result<Vec<f64>, OracleError> {
        let s = self.n_states;
        // Solve transpose(Q) x = 0 with the last equation replaced by the
        // normalization constraint.
        let mut mat = vec![0.0; s * s];
        for i in 0..s {
            for j in 0..s {
                mat[i * s + j] = self.q[j * s + i];
            }
        }
        for j in 0..s {
            mat[(s - 1) * s + j] = 1.0;
        }
        let mut rhs = vec![0.0; s];
        rhs[s - 1] = 1.0;
        solve_dense(&mut mat, &mut rhs, s)?;
        Ok(rhs)
    }

    fn check_distribution(&self, p0: &[f64], t: f64) -> Result<(), OracleError> {
        if p0.len() != self.n_states {
            return Err(OracleError::InvalidInput(format!(
                "distribution has {} entries, chain has {} states",
                p0.len(),
                self.n_states
            )));
        }
        if !(t >= 0.0) {
            return Err(OracleError::InvalidInput(format!(
                "time must be nonnegative, got {t}"
            )));
        }
        Ok(())
    }
}

fn identity(s: usize) -> Vec<f64> {
    let mut m = vec![0.0; s * s];
    for i in 0..s {
        m[i * s + i] = 1.0;
    }
    m
}

fn inf_norm(m: &[f64], s: usize) -> f64 {
    (0..s)
        .map(|i| m[i * s..(i + 1) * s].iter().map(|x| x.abs()).sum())
        .fold(0.0f64, f64::max)
}

fn mat_mul(a: &[f64], b: &[f64], s: usize) -> Vec<f64> {
    let mut out = vec![0.0; s * s];
    for i in 0..s {
        for k in 0..s {
            let aik = a[i * s + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * s..(k + 1) * s];
            let orow = &mut out[i * s..(i + 1) * s];
            for (o, &bv) in orow.iter_mut().zip(brow.iter()) {
                *o += aik * bv;
            }
        }
    }
    out
}

fn vec_mat(v: &[f64], m: &[f64], s: usize) -> Vec<f64> {
    let mut out = vec![0.0; s];
    for (k, &vk) in v.iter().enumerate() {
        if vk == 0.0 {
            continue;
        }
        let row = &m[k * s..(k + 1) * s];
        for (o, &mv) in out.iter_mut().zip(row.iter()) {
            *o += vk * mv;
        }
    }
    out
}

/// In-place Gaussian elimination with partial pivoting; `rhs` becomes the
/// solution.
fn solve_dense(mat: &mut [f64], rhs: &mut [f64], s: usize) -> Result<(), OracleError> {
    for col in 0..s {
        let pivot_row = (col..s)
            .max_by(|&a, &b| {
                mat[a * s + col]
                    .abs()
                    .total_cmp(&mat[b * s + col].abs())
            })
            .unwrap();
        if mat[pivot_row * s + col].abs() < 1e-300 {
            return Err(OracleError::InvalidInput(
                "singular stationary system (chain not irreducible?)".into(),
            ));
        }
        if pivot_row != col {
            for j in 0..s {
                mat.swap(col * s + j, pivot_row * s + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = mat[col * s + col];
        for row in col + 1..s {
            let factor = mat[row * s + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            mat[row * s + col] = 0.0;
            for j in col + 1..s {
                mat[row * s + j] -= factor * mat[col * s + j];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for col in (0..s).rev() {
        let mut x = rhs[col];
        for j in col + 1..s {
            x -= mat[col * s + j] * rhs[j];
        }
        rhs[col] = x / mat[col * s + col];
    }
    Ok(())
}
