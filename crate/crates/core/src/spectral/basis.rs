use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A 2D cosine mode `(j, k)` with `cos(jπx/L) cos(kπy/L)` as eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mode {
    pub j: usize,
    pub k: usize,
}

/// Cosine basis on an `n × n` cell-centred grid of the square `[0, L]²`.
///
/// Modes are ordered row-major in `(j, k)` with `(0, 0)` removed, so there are `n² − 1`
/// of them. The basis carries the cosine table used by the transforms; cloning is cheap.
#[derive(Clone)]
pub struct Basis2D {
    n: usize,
    length: f64,
    // cos_table[j * n + i] = w_j cos(jπ(i + ½)/n)
    cos_table: Arc<[f64]>,
}

impl Basis2D {
    /// Basis on the unit square.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_length(n, 1.0)
    }

    /// Basis on `[0, length]²`. The length only enters the Laplacian eigenvalues.
    pub fn with_length(n: usize, length: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("grid_size", format!("need at least 2 cells per side, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid("length", format!("must be positive and finite, got {length}")));
        }
        let w0 = (1.0 / n as f64).sqrt();
        let w = (2.0 / n as f64).sqrt();
        let mut table = Vec::with_capacity(n * n);
        for j in 0..n {
            let wj = if j == 0 { w0 } else { w };
            for i in 0..n {
                table.push(wj * (PI * j as f64 * (i as f64 + 0.5) / n as f64).cos());
            }
        }
        Ok(Basis2D { n, length, cos_table: table.into() })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mode_count(&self) -> usize {
        self.n * self.n - 1
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Position of mode `(j, k)` in coefficient vectors; `None` for `(0, 0)` or out of range.
    pub fn index_of(&self, mode: Mode) -> Option<usize> {
        if mode.j >= self.n || mode.k >= self.n || (mode.j == 0 && mode.k == 0) {
            return None;
        }
        Some(mode.j * self.n + mode.k - 1)
    }

    pub fn mode_at(&self, index: usize) -> Mode {
        let flat = index + 1;
        Mode { j: flat / self.n, k: flat % self.n }
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.mode_count()).map(move |i| self.mode_at(i))
    }

    /// Eigenvalue of `−Δ` with homogeneous Neumann conditions: `π²(j² + k²)/L²`.
    pub fn laplacian_eigenvalue(&self, mode: Mode) -> f64 {
        let (j, k) = (mode.j as f64, mode.k as f64);
        PI * PI * (j * j + k * k) / (self.length * self.length)
    }

    /// Nodal coordinate of cell `i` along either axis.
    pub fn node_coordinate(&self, i: usize) -> f64 {
        self.length * (i as f64 + 0.5) / self.n as f64
    }

    pub(crate) fn cos_table(&self) -> &[f64] {
        &self.cos_table
    }

    pub(crate) fn ensure_same(&self, other: &Basis2D, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!("{what}: {self} vs {other}")))
        }
    }
}

impl PartialEq for Basis2D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl fmt::Debug for Basis2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Basis2D").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl fmt::Display for Basis2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} grid on [0,{}]^2", self.n, self.n, self.length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_count_excludes_constant() {
        let b = Basis2D::new(7).unwrap();
        assert_eq!(b.mode_count(), 48);
        assert_eq!(b.modes().count(), 48);
        assert!(b.modes().all(|m| !(m.j == 0 && m.k == 0)));
        assert_eq!(b.index_of(Mode { j: 0, k: 0 }), None);
    }

    #[test]
    fn index_round_trip() {
        let b = Basis2D::new(5).unwrap();
        for (i, m) in b.modes().enumerate() {
            assert_eq!(b.index_of(m), Some(i));
        }
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(Basis2D::new(1).is_err());
        assert!(Basis2D::with_length(4, 0.0).is_err());
    }

    #[test]
    fn table_rows_are_orthonormal() {
        let b = Basis2D::new(9).unwrap();
        let t = b.cos_table();
        for a in 0..9 {
            for c in 0..9 {
                let dot: f64 = (0..9).map(|i| t[a * 9 + i] * t[c * 9 + i]).sum();
                let want = if a == c { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-14);
            }
        }
    }
}
