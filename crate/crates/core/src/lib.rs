//! Pseudo-spectral Navier–Stokes on the periodic box with coarse-grained
//! energy-budget diagnostics.
//!
//! Fields live on `[0, 2π)^d` (`d = 2, 3`) as full complex spectra with
//! `f(x) = Σ_k c(k) e^{ik·x}`. See [`field::SpectralField`] for storage.

pub mod coarse;
pub mod error;
pub mod experiment;
mod fft;
pub mod field;
pub mod grid;
pub mod quadrature;
pub mod solver;
pub mod stats;
pub mod synthetic;

pub use coarse::{Mollifier, Profile};
pub use error::{Error, Result};
pub use field::{LpOrder, RealSamples, SpectralField};
pub use grid::Grid;

/// Caps the global rayon pool at `LFLX_THREADS` threads when that variable is
/// set. Call once before any parallel work; later calls are no-ops.
pub fn init_thread_pool() {
    if let Some(n) = std::env::var("LFLX_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
