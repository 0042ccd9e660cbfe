//! Aggregate propensity bookkeeping: a sum tree over hop edges plus
//! closed-form running totals for reaction proposals.
//!
//! Each tree leaf covers one (species, edge) pair and stores the sum of the
//! two directed hop rates across that edge; the individual directed rates
//! live in a side array consulted once a leaf is chosen. Edge `e` joins
//! nodes `e` and `e+1` (mod n). Rates come from ratios of the maintained
//! nodal Boltzmann fields, so refreshing an edge costs no exponentials.
//!
//! Binding proposals never enter the tree: their total is
//! `lambda / gamma * sum_i nA_i * w_i` with `w = K * nB` maintained under
//! count changes, so selecting a pair costs one pass over occupied voxels.

use rdd_core::SpeciesId;

use crate::phi::PhiFields;
use crate::tables::{for_span, ModelTables};

/// Fixed-shape binary sum tree over `len` nonnegative leaves.
#[derive(Clone, Debug)]
pub struct SumTree {
    base: usize,
    tree: Vec<f64>,
    len: usize,
}

impl SumTree {
    pub fn new(len: usize) -> Self {
        let base = len.next_power_of_two().max(1);
        SumTree {
            base,
            tree: vec![0.0; 2 * base],
            len,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.tree[self.base + i]
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.tree[1]
    }

    /// Single-leaf update with an immediate root walk; the event loop uses
    /// `set_raw` + `repair_range` instead.
    #[cfg(test)]
    pub fn set(&mut self, i: usize, value: f64) {
        let mut pos = self.base + i;
        if self.tree[pos] == value {
            return;
        }
        self.tree[pos] = value;
        while pos > 1 {
            pos >>= 1;
            self.tree[pos] = self.tree[2 * pos] + self.tree[2 * pos + 1];
        }
    }

    /// Writes a leaf without updating ancestors; callers must follow up with
    /// `repair_range` (or `repair_all`) covering the leaf.
    #[inline]
    pub fn set_raw(&mut self, i: usize, value: f64) {
        self.tree[self.base + i] = value;
    }

    /// Rebuilds every internal node above the inclusive leaf range
    /// `[lo, hi]` in one bottom-up sweep: O(hi - lo + log n) instead of one
    /// root walk per touched leaf.
    pub fn repair_range(&mut self, lo: usize, hi: usize) {
        let mut lo = self.base + lo;
        let mut hi = self.base + hi;
        while lo > 1 {
            lo >>= 1;
            hi >>= 1;
            for p in lo..=hi {
                self.tree[p] = self.tree[2 * p] + self.tree[2 * p + 1];
            }
        }
    }

    pub fn repair_all(&mut self) {
        for p in (1..self.base).rev() {
            self.tree[p] = self.tree[2 * p] + self.tree[2 * p + 1];
        }
    }

    /// Leaf holding `target` (which must lie in `[0, total())`) and the
    /// remainder of `target` within that leaf. The descent keeps the
    /// remainder strictly below the current subtree sum, so it cannot land
    /// on a zero leaf except through rounding of the running remainder; that
    /// case is repaired by stepping to the nearest positive leaf.
    pub fn locate(&self, mut target: f64) -> (usize, f64) {
        let mut node = 1;
        while node < self.base {
            let left = self.tree[2 * node];
            if target < left {
                node = 2 * node;
            } else {
                target -= left;
                node = 2 * node + 1;
            }
        }
        let mut i = node - self.base;
        if self.tree[self.base + i] <= 0.0 {
            for step in 1..self.base {
                if i >= step && self.tree[self.base + i - step] > 0.0 {
                    i -= step;
                    break;
                }
                if i + step < self.len && self.tree[self.base + i + step] > 0.0 {
                    i += step;
                    break;
                }
            }
            target = 0.0;
        }
        (i, target.min(self.tree[self.base + i]))
    }
}

/// All propensity state the event loop keeps between events.
#[derive(Clone, Debug)]
pub struct EventSchedule {
    pub tree: SumTree,
    /// Directed hop rates, two per tree leaf: `rates[2 * leaf]` moves right
    /// across the edge, `rates[2 * leaf + 1]` moves left.
    rates: Vec<f64>,
    /// `v[k] = sum_j K(k, j) * nA_j`.
    pub v: Vec<f64>,
    /// `w[k] = sum_j K(k, j) * nB_j`.
    pub w: Vec<f64>,
    /// `sum_k nA_k * w_k`; binding proposal total is `lambda / gamma` times
    /// this.
    pub s_bind: f64,
    /// Total complex count; unbinding proposal total is `mu` times this.
    pub total_c: u64,
}

impl EventSchedule {
    pub fn rebuild(tables: &ModelTables, counts: &[Vec<u32>], phi: &PhiFields) -> Self {
        let n = tables.n;
        let mut sched = EventSchedule {
            tree: SumTree::new(tables.n_species * n),
            rates: vec![0.0; tables.n_species * n * 2],
            v: vec![0.0; n],
            w: vec![0.0; n],
            s_bind: 0.0,
            total_c: counts[tables.c.0].iter().map(|&c| c as u64).sum(),
        };
        for st in 0..tables.n_species {
            for e in 0..n {
                sched.refresh_edge(tables, phi, counts, st, e);
            }
        }
        sched.tree.repair_all();
        let (na, nb) = (&counts[tables.a.0], &counts[tables.b.0]);
        for k in 0..n {
            let mut vk = 0.0;
            let mut wk = 0.0;
            for j in 0..n {
                let kr = tables.k_row[tables.offset(k, j)];
                vk += kr * na[j] as f64;
                wk += kr * nb[j] as f64;
            }
            sched.v[k] = vk;
            sched.w[k] = wk;
        }
        sched.s_bind = (0..n).map(|k| na[k] as f64 * sched.w[k]).sum();
        sched
    }

    /// Directed rate behind tree leaf `leaf`: `dir = 0` moves right.
    #[inline]
    pub fn rate(&self, leaf: usize, dir: usize) -> f64 {
        self.rates[2 * leaf + dir]
    }

    /// Recomputes both directed rates of edge `(st, e)` and writes the leaf
    /// without repairing the tree; callers repair the touched range.
    #[inline]
    pub fn refresh_edge(
        &mut self,
        tables: &ModelTables,
        phi: &PhiFields,
        counts: &[Vec<u32>],
        st: usize,
        e: usize,
    ) {
        let n = tables.n;
        let k0 = e;
        let k1 = if e + 1 == n { 0 } else { e + 1 };
        let leaf = st * n + e;
        let n0 = counts[st][k0];
        let n1 = counts[st][k1];
        if n0 == 0 && n1 == 0 {
            self.rates[2 * leaf] = 0.0;
            self.rates[2 * leaf + 1] = 0.0;
            self.tree.set_raw(leaf, 0.0);
            return;
        }
        let sid = SpeciesId(st);
        let c = tables.self_corr[st];
        let d_fwd = phi.get(sid, k1) - phi.get(sid, k0) - c;
        let d_bwd = -d_fwd - 2.0 * c;
        let pref = tables.d_over_h2[st];
        // The ratio of nodal Boltzmann factors supplies exp(d_fwd) with no
        // exponential call; under- or overflowed fields fall back to the
        // direct evaluation. The quadratic series takes over where forming
        // `exp(d) - 1` would lose precision.
        let mut g = phi.boltz(sid, k1) / phi.boltz(sid, k0) * tables.exp_neg_self[st];
        if !g.is_finite() || g <= 0.0 {
            g = d_fwd.exp();
        }
        let f_fwd = if d_fwd.abs() < 1e-3 {
            1.0 - 0.5 * d_fwd + d_fwd * d_fwd / 12.0
        } else {
            d_fwd / (g - 1.0)
        };
        let f_bwd = if d_bwd.abs() < 1e-3 {
            1.0 - 0.5 * d_bwd + d_bwd * d_bwd / 12.0
        } else {
            d_bwd / (tables.exp_neg_two_self[st] / g - 1.0)
        };
        let r0 = n0 as f64 * pref * f_fwd;
        let r1 = n1 as f64 * pref * f_bwd;
        self.rates[2 * leaf] = r0;
        self.rates[2 * leaf + 1] = r1;
        self.tree.set_raw(leaf, r0 + r1);
    }

    /// Refreshes every edge in a ring span of width `width` starting at
    /// `start`, then repairs the tree over the touched leaves.
    pub fn refresh_span(
        &mut self,
        tables: &ModelTables,
        phi: &PhiFields,
        counts: &[Vec<u32>],
        st: usize,
        start: usize,
        width: usize,
    ) {
        let n = tables.n;
        let w = width.min(n);
        let head = (n - start).min(w);
        for e in start..start + head {
            self.refresh_edge(tables, phi, counts, st, e);
        }
        self.tree
            .repair_range(st * n + start, st * n + start + head - 1);
        if head < w {
            let tail = w - head;
            for e in 0..tail {
                self.refresh_edge(tables, phi, counts, st, e);
            }
            self.tree.repair_range(st * n, st * n + tail - 1);
        }
    }

    /// Updates the reaction aggregates after `delta` particles of species
    /// `s` appeared at `node`. Call once per single-particle change, in the
    /// order the changes happen.
    pub fn apply_count_change(
        &mut self,
        tables: &ModelTables,
        s: SpeciesId,
        node: usize,
        delta: f64,
    ) {
        let n = tables.n;
        let ks = tables.k_support;
        if s == tables.a {
            self.s_bind += delta * self.w[node];
            let v = &mut self.v;
            for_span(n, node as isize - ks as isize, 2 * ks + 1, |k| {
                v[k] += delta * tables.k_row[tables.offset(k, node)];
            });
        } else if s == tables.b {
            self.s_bind += delta * self.v[node];
            let w = &mut self.w;
            for_span(n, node as isize - ks as isize, 2 * ks + 1, |k| {
                w[k] += delta * tables.k_row[tables.offset(k, node)];
            });
        } else if s == tables.c {
            if delta >= 0.0 {
                self.total_c += delta as u64;
            } else {
                self.total_c -= (-delta) as u64;
            }
        }
    }

    #[inline]
    pub fn hop_total(&self) -> f64 {
        self.tree.total()
    }

    #[inline]
    pub fn bind_total(&self, tables: &ModelTables) -> f64 {
        tables.bind_pref * self.s_bind.max(0.0)
    }

    #[inline]
    pub fn unbind_total(&self, tables: &ModelTables) -> f64 {
        tables.mu * self.total_c as f64
    }

    #[inline]
    pub fn total(&self, tables: &ModelTables) -> f64 {
        self.hop_total() + self.bind_total(tables) + self.unbind_total(tables)
    }

    /// Largest relative deviation from a freshly rebuilt schedule.
    pub fn deviation_from(&self, reference: &EventSchedule) -> f64 {
        if self.total_c != reference.total_c {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        let mut track = |a: f64, b: f64| {
            worst = worst.max((a - b).abs() / (1.0 + b.abs()));
        };
        for i in 0..self.rates.len() {
            track(self.rates[i], reference.rates[i]);
        }
        for i in 0..self.tree.len() {
            track(self.tree.get(i), reference.tree.get(i));
        }
        for k in 0..self.v.len() {
            track(self.v[k], reference.v[k]);
            track(self.w[k], reference.w[k]);
        }
        track(self.s_bind, reference.s_bind);
        worst
    }
}
