//! Incrementally maintained nodal potential fields.
//!
//! For each probe species `s`, `phi[s][k]` holds the full potential a
//! species-`s` particle at node `k` would feel: the external one-body term
//! plus the scaled pair energy against every particle currently on the
//! lattice (including any particle already sitting at `k`). Alongside it,
//! `boltz[s][k] = exp(phi[s][k])` is kept multiplicatively with tabulated
//! per-offset factors, so hop-rate refreshes need no exponentials at all.
//!
//! Single-particle changes touch only nodes within the pair potential
//! support; the affected hop edges are collected as contiguous ring spans
//! for batched refresh.

use rdd_core::SpeciesId;

use crate::tables::{for_span, ModelTables};

#[derive(Clone, Debug)]
pub struct PhiFields {
    /// `data[species][node]`: one-body plus pair energy over gamma.
    data: Vec<Vec<f64>>,
    /// `boltz[species][node] = exp(data[species][node])`, maintained
    /// multiplicatively.
    boltz: Vec<Vec<f64>>,
}

impl PhiFields {
    /// Dense rebuild from scratch.
    pub fn build(tables: &ModelTables, counts: &[Vec<u32>]) -> Self {
        let mut data: Vec<Vec<f64>> = (0..tables.n_species)
            .map(|s| tables.one_body[s].clone())
            .collect();
        for (j, row) in counts.iter().enumerate() {
            for (m, &cnt) in row.iter().enumerate() {
                if cnt == 0 {
                    continue;
                }
                let scaled = cnt as f64 / tables.gamma_f;
                for st in 0..tables.n_species {
                    let r = tables.support(SpeciesId(st), SpeciesId(j));
                    let field = &mut data[st];
                    for_span(tables.n, m as isize - r as isize, 2 * r + 1, |k| {
                        field[k] +=
                            scaled * tables.u_at_offset(SpeciesId(st), SpeciesId(j), tables.offset(k, m));
                    });
                }
            }
        }
        let boltz = data
            .iter()
            .map(|row| row.iter().map(|&x| x.exp()).collect())
            .collect();
        PhiFields { data, boltz }
    }

    #[inline]
    pub fn get(&self, s: SpeciesId, k: usize) -> f64 {
        self.data[s.0][k]
    }

    #[inline]
    pub fn boltz(&self, s: SpeciesId, k: usize) -> f64 {
        self.boltz[s.0][k]
    }

    /// Applies one particle of species `j` appearing (`add = true`) or
    /// vanishing at node `m`, and records the affected hop edges.
    pub fn apply_unit(
        &mut self,
        tables: &ModelTables,
        j: SpeciesId,
        m: usize,
        add: bool,
        dirty: &mut DirtySpans,
    ) {
        let n = tables.n;
        for st in 0..tables.n_species {
            let r = tables.support(SpeciesId(st), j);
            let field = &mut self.data[st];
            let boltz = &mut self.boltz[st];
            let u_row = tables.u_row(SpeciesId(st), j);
            let f_row = tables.exp_row(SpeciesId(st), j, add);
            let sign = if add { 1.0 } else { -1.0 };
            let inv_gamma = sign / tables.gamma_f;
            for_span(n, m as isize - r as isize, 2 * r + 1, |k| {
                let d = tables.offset(k, m);
                field[k] += inv_gamma * u_row[d];
                boltz[k] *= f_row[d];
            });
            dirty.push(st, n, m as isize - r as isize - 1, 2 * r + 2);
        }
    }

    /// Like two `apply_unit` calls moving a particle across adjacent nodes,
    /// but records one merged edge span per species.
    pub fn apply_move(
        &mut self,
        tables: &ModelTables,
        j: SpeciesId,
        from: usize,
        to: usize,
        dirty: &mut DirtySpans,
    ) {
        let n = tables.n;
        // Represent the adjacent pair as (base, base + 1) on the ring.
        let base = if to == (from + 1) % n { from } else { to };
        for st in 0..tables.n_species {
            let r = tables.support(SpeciesId(st), j);
            dirty.push(st, n, base as isize - r as isize - 1, 2 * r + 3);
        }
        let mut halves = DirtySpans::empty();
        self.apply_unit(tables, j, from, false, &mut halves);
        self.apply_unit(tables, j, to, true, &mut halves);
    }

    /// Largest deviation from a dense rebuild, scaled per node by
    /// `1 / (1 + |reference|)`, over both the additive and exponential
    /// fields.
    pub fn deviation_from(&self, reference: &PhiFields) -> f64 {
        let mut worst: f64 = 0.0;
        for (mine, theirs) in self.data.iter().zip(reference.data.iter()) {
            for (&a, &b) in mine.iter().zip(theirs.iter()) {
                worst = worst.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
        for (mine, theirs) in self.boltz.iter().zip(reference.boltz.iter()) {
            for (&a, &b) in mine.iter().zip(theirs.iter()) {
                worst = worst.max((a - b).abs() / (1.0 + b.abs()));
            }
        }
        worst
    }
}

/// Per-species lists of ring spans of hop edges that need refreshing.
/// Spans may overlap; refreshing is idempotent.
#[derive(Clone, Debug)]
pub struct DirtySpans {
    spans: Vec<Vec<(u32, u32)>>,
}

impl DirtySpans {
    pub fn new(n_species: usize) -> Self {
        DirtySpans {
            spans: vec![Vec::with_capacity(4); n_species],
        }
    }

    /// A throwaway collector for callers that mark spans themselves.
    fn empty() -> Self {
        DirtySpans { spans: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, st: usize, n: usize, start: isize, width: usize) {
        if let Some(list) = self.spans.get_mut(st) {
            let w = width.min(n) as u32;
            let s = start.rem_euclid(n as isize) as u32;
            list.push((s, w));
        }
    }

    pub fn take(&mut self, st: usize) -> Vec<(u32, u32)> {
        std::mem::take(&mut self.spans[st])
    }

    pub fn restore(&mut self, st: usize, mut buffer: Vec<(u32, u32)>) {
        buffer.clear();
        self.spans[st] = buffer;
    }
}
