//! Uniform partitions of [0, 1] and the piecewise polynomial space on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh `t_j = j / n`, `j = 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    n: usize,
    breakpoints: Vec<f64>,
}

impl Mesh {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("need at least one subinterval".into()));
        }
        let breakpoints = (0..=n).map(|j| j as f64 / n as f64).collect();
        Ok(Mesh { n, breakpoints })
    }

    /// Number of panels.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Endpoints of panel `j` (zero based).
    pub fn panel(&self, j: usize) -> (f64, f64) {
        (self.breakpoints[j], self.breakpoints[j + 1])
    }

    pub fn panels(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Zero-based index of the panel owning `t`.
    ///
    /// Panels are `(t_{j-1}, t_j]`, except that `t_0` belongs to the first one.
    pub fn owner(&self, t: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        Ok(self.owner_unchecked(t))
    }

    pub(crate) fn owner_unchecked(&self, t: f64) -> usize {
        let n = self.n;
        let mut k = ((t * n as f64).ceil() as usize).clamp(1, n) - 1;
        while k > 0 && t <= self.breakpoints[k] {
            k -= 1;
        }
        while k + 1 < n && t > self.breakpoints[k + 1] {
            k += 1;
        }
        k
    }

    /// Index of the panel whose open interior contains `t`, if any.
    pub(crate) fn interior_owner(&self, t: f64) -> Option<usize> {
        if t <= 0.0 || t >= 1.0 {
            return None;
        }
        let k = self.owner_unchecked(t);
        let (a, b) = self.panel(k);
        (a < t && t < b).then_some(k)
    }
}

/// Piecewise polynomials of degree at most `2r` on a uniform mesh, without
/// continuity across breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySpace {
    mesh: Mesh,
    r: usize,
}

impl PolySpace {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        Ok(PolySpace {
            mesh: Mesh::new(n)?,
            r,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n(&self) -> usize {
        self.mesh.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Local dimension `2r + 1`.
    pub fn local_dim(&self) -> usize {
        2 * self.r + 1
    }

    pub fn dim(&self) -> usize {
        self.mesh.n * self.local_dim()
    }

    /// Global index of local function `eta` on zero-based panel `j`.
    pub fn index(&self, j: usize, eta: usize) -> usize {
        j * self.local_dim() + eta
    }

    /// Inverse of [`PolySpace::index`].
    pub fn split_index(&self, p: usize) -> (usize, usize) {
        (p / self.local_dim(), p % self.local_dim())
    }
}
