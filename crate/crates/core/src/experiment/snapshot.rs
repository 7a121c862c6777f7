//! Binary snapshot files.
//!
//! Layout, all integers and reals little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `LFLX` |
//! | 2 | format version (`u16`) |
//! | 2 | dimension (`u16`) |
//! | 4 | points per axis (`u32`) |
//! | 4 | velocity component count (`u32`) |
//! | 8 | viscosity (`f64`) |
//! | 8 | time (`f64`) |
//! | 8·c·n^d | velocity samples, component-contiguous, row-major |
//! | 1 | pressure flag: 0 absent, 1 present |
//! | 8·n^d | pressure samples, if flagged |

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::RealSamples;
use crate::grid::Grid;
use crate::solver::Snapshot;

pub const MAGIC: [u8; 4] = *b"LFLX";
pub const FORMAT_VERSION: u16 = 1;
/// Relative divergence above which a loaded velocity is flagged.
pub const DIVERGENCE_WARNING: f64 = 1e-8;

const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 4 + 8 + 8;

/// The exact payload of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub nu: f64,
    pub t: f64,
    pub velocity: RealSamples,
    pub pressure: Option<RealSamples>,
}

/// A loaded file plus the solenoidality check done on load.
#[derive(Debug, Clone)]
pub struct LoadedSnapshot {
    pub file: SnapshotFile,
    /// `max_k |k·û(k)|` over the RMS velocity.
    pub divergence: f64,
    pub divergence_warning: bool,
}

impl SnapshotFile {
    pub fn from_snapshot(nu: f64, s: &Snapshot) -> Self {
        SnapshotFile {
            nu,
            t: s.t,
            velocity: s.u.to_real(),
            pressure: Some(s.p.to_real()),
        }
    }

    /// Spectral snapshot; a missing pressure is left zero.
    pub fn to_snapshot(&self) -> Snapshot {
        let u = self.velocity.to_spectral();
        let p = match &self.pressure {
            Some(p) => p.to_spectral(),
            None => crate::field::SpectralField::zeros(*self.velocity.grid(), 1),
        };
        Snapshot { t: self.t, u, p }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.velocity.grid();
        let len = grid.len();
        let comps = self.velocity.components();
        let extra = self.pressure.as_ref().map_or(0, |_| 8 * len);
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * comps * len + 1 + extra);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(grid.dim() as u16).to_le_bytes());
        out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
        out.extend_from_slice(&(comps as u32).to_le_bytes());
        out.extend_from_slice(&self.nu.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for v in self.velocity.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match &self.pressure {
            Some(p) => {
                out.push(1);
                for v in p.values() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            None => out.push(0),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let dim = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes")) as usize;
        let n = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes")) as usize;
        let comps = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes")) as usize;
        let nu = r.f64()?;
        let t = r.f64()?;
        let grid = Grid::new(dim, n)?;
        if comps != dim {
            return Err(Error::NotAVectorField(comps));
        }
        let velocity = RealSamples::new(grid, comps, r.f64s(comps * grid.len())?)?;
        let pressure = match r.take(1)?[0] {
            0 => None,
            1 => Some(RealSamples::new(grid, 1, r.f64s(grid.len())?)?),
            flag => {
                return Err(Error::InvalidArgument(format!("pressure flag {flag} is not 0 or 1")))
            }
        };
        if r.pos != bytes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} trailing bytes after snapshot payload",
                bytes.len() - r.pos
            )));
        }
        Ok(SnapshotFile {
            nu,
            t,
            velocity,
            pressure,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated {
                needed: self.pos.saturating_add(k),
                found: self.bytes.len(),
            }),
        }
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let raw = self.take(count.checked_mul(8).ok_or(Error::Truncated {
            needed: usize::MAX,
            found: self.bytes.len(),
        })?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn save_snapshot(path: impl AsRef<Path>, file: &SnapshotFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, file.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<LoadedSnapshot> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let file = SnapshotFile::from_bytes(&bytes)?;
    let u = file.velocity.to_spectral();
    let rms = (u.l2_norm_squared() / u.grid().volume()).sqrt();
    let div = u.max_divergence_mode()?;
    let divergence = if rms > 0.0 { div / rms } else { div };
    let divergence_warning = divergence > DIVERGENCE_WARNING;
    if divergence_warning {
        log::warn!(
            "{}: velocity divergence {divergence:.3e} exceeds {DIVERGENCE_WARNING:e}",
            path.display()
        );
    }
    Ok(LoadedSnapshot {
        file,
        divergence,
        divergence_warning,
    })
}
