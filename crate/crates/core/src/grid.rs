use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the periodic box. Fixed so that wavenumbers are integers.
pub const BOX_LENGTH: f64 = 2.0 * PI;

/// Uniform collocation grid on the torus `[0, 2π)^dim`.
///
/// Linear indices are row-major with axis 0 slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct Grid {
    dim: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    dim: usize,
    n: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid::new(raw.dim, raw.n)
    }
}

impl From<Grid> for RawGrid {
    fn from(g: Grid) -> Self {
        RawGrid { dim: g.dim, n: g.n }
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        Ok(Grid { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        BOX_LENGTH / self.n as f64
    }

    /// Volume of the torus, `(2π)^dim`.
    pub fn volume(&self) -> f64 {
        BOX_LENGTH.powi(self.dim as i32)
    }

    /// Quadrature lattice used for exact pointwise products of dealiased fields.
    pub fn refined(&self) -> Grid {
        Grid {
            dim: self.dim,
            n: 2 * self.n,
        }
    }

    /// Signed wavenumber for a per-axis index, in `[-n/2, n/2)`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Per-axis index holding wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Largest wavenumber retained by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Splits a linear index into per-axis indices (unused trailing entries are 0).
    #[inline]
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    #[inline]
    pub fn ravel(&self, ix: [usize; 3]) -> usize {
        let mut idx = 0;
        for &i in ix.iter().take(self.dim) {
            idx = idx * self.n + i;
        }
        idx
    }

    /// Wavevector at a linear index (unused trailing entries are 0).
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let ix = self.unravel(idx);
        let mut k = [0i64; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(ix[a]);
        }
        k
    }

    /// Linear index holding the wavevector `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let ix = self.unravel(idx);
        let mut out = [0usize; 3];
        for a in 0..self.dim {
            out[a] = (self.n - ix[a]) % self.n;
        }
        self.ravel(out)
    }

    /// Whether any component of the wavevector at `idx` sits on the Nyquist index.
    #[inline]
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        let ix = self.unravel(idx);
        ix.iter().take(self.dim).any(|&i| i == self.n / 2)
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> i64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Physical coordinate of a per-axis index.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Physical position of a lattice point.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let ix = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(ix[a]);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(2, 4).is_err());
        assert!(Grid::new(2, 24).is_err());
        assert!(Grid::new(1, 16).is_err());
        assert!(Grid::new(4, 16).is_err());
        assert!(Grid::new(3, 8).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = Grid::new(2, 16).unwrap();
        let ks: Vec<i64> = (0..16).map(|i| g.wavenumber(i)).collect();
        assert_eq!(*ks.iter().min().unwrap(), -8);
        assert_eq!(*ks.iter().max().unwrap(), 7);
        for i in 0..16 {
            assert_eq!(g.index_of(g.wavenumber(i)), i);
        }
    }

    #[test]
    fn ravel_roundtrip_and_conjugates() {
        let g = Grid::new(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.ravel(g.unravel(idx)), idx);
            let c = g.conjugate_index(idx);
            assert_eq!(g.conjugate_index(c), idx);
            if !g.touches_nyquist(idx) {
                let k = g.wavevector(idx);
                let kc = g.wavevector(c);
                assert_eq!([-k[0], -k[1], -k[2]], kc);
            }
        }
    }

    #[test]
    fn serde_validates() {
        let bad: std::result::Result<Grid, _> = serde_json::from_str(r#"{"dim":2,"n":12}"#);
        assert!(bad.is_err());
        let good: Grid = serde_json::from_str(r#"{"dim":2,"n":32}"#).unwrap();
        assert_eq!(good.n(), 32);
    }
}
