//! One-body and pair interaction potentials.
//!
//! The pair family is harmonic soft-core repulsion: species with radii
//! `r_s`, `r_s'` repel inside a shell of width `cutoff_factor * (r_s + r_s')`
//! with strength `kappa`. A custom bounded pair function can replace it for
//! experiments that need a different shape.

use std::sync::Arc;

use crate::error::CoreError;
use crate::species::SpeciesId;

type OneBodyFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type PairFn = Arc<dyn Fn(SpeciesId, SpeciesId, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct PotentialTable {
    kappa: f64,
    cutoff_factor: f64,
    radii: Vec<f64>,
    one_body: Vec<Option<OneBodyFn>>,
    pair_override: Option<(PairFn, f64)>,
}

impl std::fmt::Debug for PotentialTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialTable")
            .field("kappa", &self.kappa)
            .field("cutoff_factor", &self.cutoff_factor)
            .field("radii", &self.radii)
            .field("has_one_body", &self.one_body.iter().any(Option::is_some))
            .field("has_pair_override", &self.pair_override.is_some())
            .finish()
    }
}

impl PotentialTable {
    pub fn harmonic(kappa: f64, cutoff_factor: f64, radii: Vec<f64>) -> Result<Self, CoreError> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "kappa must be finite and nonnegative, got {kappa}"
            )));
        }
        if !(cutoff_factor.is_finite() && cutoff_factor > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "cutoff factor must be positive, got {cutoff_factor}"
            )));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(CoreError::InvalidParameter(
                "species radii must be finite and nonnegative".into(),
            ));
        }
        let n = radii.len();
        Ok(PotentialTable {
            kappa,
            cutoff_factor,
            radii,
            one_body: vec![None; n],
            pair_override: None,
        })
    }

    /// No interactions at all (kappa = 0).
    pub fn free(n_species: usize) -> Self {
        PotentialTable::harmonic(0.0, 3.0, vec![0.0; n_species]).expect("valid free table")
    }

    pub fn with_one_body(
        mut self,
        s: SpeciesId,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.one_body[s.0] = Some(Arc::new(v));
        self
    }

    /// Replaces the harmonic pair family by `u(s, s', r)`, which must be
    /// bounded and vanish for `r >= cutoff`.
    pub fn with_pair_override(
        mut self,
        u: impl Fn(SpeciesId, SpeciesId, f64) -> f64 + Send + Sync + 'static,
        cutoff: f64,
    ) -> Self {
        self.pair_override = Some((Arc::new(u), cutoff));
        self
    }

    pub fn n_species(&self) -> usize {
        self.radii.len()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Unscaled pair potential at separation `r >= 0`.
    pub fn pair(&self, s: SpeciesId, t: SpeciesId, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if let Some((u, _)) = &self.pair_override {
            return u(s, t, r);
        }
        let reach = self.cutoff_factor * (self.radii[s.0] + self.radii[t.0]);
        let gap = reach - r;
        if gap > 0.0 {
            self.kappa * gap * gap
        } else {
            0.0
        }
    }

    /// Separation beyond which `pair(s, t, r)` is exactly zero.
    pub fn pair_cutoff(&self, s: SpeciesId, t: SpeciesId) -> f64 {
        match &self.pair_override {
            Some((_, cutoff)) => *cutoff,
            None => {
                if self.kappa == 0.0 {
                    0.0
                } else {
                    self.cutoff_factor * (self.radii[s.0] + self.radii[t.0])
                }
            }
        }
    }

    /// One-body potential for species `s` at `x` (zero unless configured).
    pub fn one_body(&self, s: SpeciesId, x: f64) -> f64 {
        match &self.one_body[s.0] {
            Some(v) => v(x),
            None => 0.0,
        }
    }
}
