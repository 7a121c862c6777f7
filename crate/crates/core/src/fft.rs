//! Multidimensional complex FFTs on the periodic lattice, built from 1-D
//! `rustfft` line transforms applied axis by axis.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// Unnormalized in-place transform of one scalar block of length `n^dim`.
pub(crate) fn transform(grid: &Grid, data: &mut [Complex64], dir: Direction) {
    debug_assert_eq!(data.len(), grid.len());
    let n = grid.n();
    let p = plans(n);
    let fft = match dir {
        Direction::Forward => p.forward,
        Direction::Inverse => p.inverse,
    };

    // Last axis: lines are contiguous.
    data.par_chunks_mut(n * 16).for_each(|chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });

    let mut lines = vec![Complex64::default(); data.len()];
    for axis in 0..grid.dim() - 1 {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let block = n * stride;
        // Gather: line (outer, inner) holds data[outer*block + pos*stride + inner].
        lines
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(line, buf)| {
                let outer = line / stride;
                let inner = line % stride;
                let base = outer * block + inner;
                for (pos, v) in buf.iter_mut().enumerate() {
                    *v = data[base + pos * stride];
                }
            });
        lines.par_chunks_mut(n * 16).for_each(|chunk| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(chunk, &mut scratch);
        });
        data.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let outer = idx / block;
            let rem = idx % block;
            let pos = rem / stride;
            let inner = rem % stride;
            *v = lines[(outer * stride + inner) * n + pos];
        });
    }
}
