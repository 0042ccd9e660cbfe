//! Uniform periodic mesh shared by the lattice simulator and quadrature rules.

use crate::error::CoreError;

/// Uniform mesh of `n` voxels on the periodic interval `[0, length)`,
/// with node `i` at `i * spacing` and voxel `i` centred on that node.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    length: f64,
    n: usize,
    spacing: f64,
}

impl Mesh {
    /// Two voxels are the smallest closed system that still has hops, so
    /// that is the floor here.
    pub fn new(length: f64, n: usize) -> Result<Self, CoreError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "mesh length must be positive and finite, got {length}"
            )));
        }
        if n < 2 {
            return Err(CoreError::InvalidParameter(format!(
                "mesh needs at least 2 voxels, got {n}"
            )));
        }
        Ok(Mesh {
            length,
            n,
            spacing: length / n as f64,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_voxels(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        i as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Wraps a possibly out-of-range signed index onto the ring.
    pub fn wrap_index(&self, i: isize) -> usize {
        i.rem_euclid(self.n as isize) as usize
    }

    /// Number of lattice steps between two nodes the shorter way round.
    pub fn node_offset(&self, i: usize, j: usize) -> usize {
        let d = (i as isize - j as isize).rem_euclid(self.n as isize) as usize;
        d.min(self.n - d)
    }

    /// Periodic distance between nodes `i` and `j`.
    pub fn node_distance(&self, i: usize, j: usize) -> f64 {
        self.node_offset(i, j) as f64 * self.spacing
    }

    /// Index of the node that `x` coincides with, if any.
    pub fn node_index_of(&self, x: f64) -> Option<usize> {
        let w = crate::geometry::wrap_position(x, self.length);
        let i = (w / self.spacing).round() as usize % self.n;
        if (crate::geometry::periodic_distance(w, self.node(i), self.length))
            < 1e-9 * self.spacing
        {
            Some(i)
        } else {
            None
        }
    }
}
