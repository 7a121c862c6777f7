//! Periodic fields in spectral and collocation form.
//!
//! A [`SpectralField`] stores complex Fourier coefficients with the
//! convention `f(x) = Σ_k c(k) exp(i k·x)`, so `c(k) = mean_x f(x) exp(-i k·x)`.
//! Scalars have one component, vectors have `dim`. Components are stored as
//! contiguous blocks of `n^dim` coefficients.
//!
//! Odd-order operators (derivatives, the divergence inside the Leray
//! projector) treat the Nyquist wavenumber `-n/2` as zero so that real fields
//! stay real.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    coeffs: Vec<Complex64>,
}

/// Point values on the collocation lattice of `grid`, component-contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSamples {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
}

/// Exponent selecting an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpOrder {
    Finite(f64),
    Infinity,
}

impl From<f64> for LpOrder {
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            LpOrder::Infinity
        } else {
            LpOrder::Finite(p)
        }
    }
}

impl RealSamples {
    pub fn new(grid: Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        let expected = grid.len() * components;
        if components == 0 || values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(RealSamples {
            grid,
            components,
            values,
        })
    }

    pub fn zeros(grid: Grid, components: usize) -> Self {
        RealSamples {
            grid,
            components,
            values: vec![0.0; grid.len() * components],
        }
    }

    /// Samples `f(position, component)` on the lattice.
    pub fn from_fn(grid: Grid, components: usize, f: impl Fn([f64; 3], usize) -> f64 + Sync) -> Self {
        let len = grid.len();
        let values = (0..len * components)
            .into_par_iter()
            .map(|i| f(grid.position(i % len), i / len))
            .collect();
        RealSamples {
            grid,
            components,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Vec<f64> {
        let len = self.grid.len();
        (0..len)
            .into_par_iter()
            .map(|i| {
                (0..self.components)
                    .map(|c| self.values[c * len + i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Equal-weight quadrature of a scalar sample block over the torus.
    pub fn integrate(grid: &Grid, values: &[f64]) -> f64 {
        values.par_iter().sum::<f64>() * grid.volume() / grid.len() as f64
    }

    /// `L^p` norm by equal-weight collocation quadrature of the pointwise magnitude.
    pub fn lp_norm(&self, p: impl Into<LpOrder>) -> Result<f64> {
        lp_of_magnitudes(&self.grid, &self.magnitude(), p.into())
    }

    pub fn to_spectral(&self) -> SpectralField {
        let len = self.grid.len();
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let scale = 1.0 / len as f64;
        for block in coeffs.chunks_mut(len) {
            fft::transform(&self.grid, block, Direction::Forward);
            block.iter_mut().for_each(|c| *c *= scale);
        }
        let mut out = SpectralField {
            grid: self.grid,
            components: self.components,
            coeffs,
        };
        out.enforce_hermitian();
        out
    }
}

pub(crate) fn lp_of_magnitudes(grid: &Grid, mags: &[f64], p: LpOrder) -> Result<f64> {
    match p {
        LpOrder::Infinity => Ok(mags.iter().fold(0.0f64, |m, v| m.max(*v))),
        LpOrder::Finite(p) if p >= 1.0 => {
            let w = grid.volume() / grid.len() as f64;
            let s: f64 = if p == 1.0 {
                mags.par_iter().sum()
            } else if p == 2.0 {
                mags.par_iter().map(|m| m * m).sum()
            } else if p == 3.0 {
                mags.par_iter().map(|m| m * m * m).sum()
            } else {
                mags.par_iter().map(|m| m.powf(p)).sum()
            };
            Ok((s * w).powf(1.0 / p))
        }
        LpOrder::Finite(p) => Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}"))),
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        SpectralField {
            grid,
            components,
            coeffs: vec![Complex64::default(); grid.len() * components],
        }
    }

    pub fn from_coeffs(grid: Grid, components: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = grid.len() * components;
        if components == 0 || coeffs.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: coeffs.len(),
            });
        }
        Ok(SpectralField {
            grid,
            components,
            coeffs,
        })
    }

    /// Stacks scalar fields into one multi-component field.
    pub fn stack(parts: &[SpectralField]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("cannot stack zero fields".into()))?;
        let mut coeffs = Vec::with_capacity(first.grid.len() * parts.len());
        let mut components = 0;
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::GridMismatch);
            }
            coeffs.extend_from_slice(&p.coeffs);
            components += p.components;
        }
        Ok(SpectralField {
            grid: first.grid,
            components,
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_vector(&self) -> bool {
        self.components == self.grid.dim()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn block(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn block_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Single component as a scalar field.
    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            components: 1,
            coeffs: self.block(c).to_vec(),
        }
    }

    /// Coefficient at wavevector `k` (entries beyond `dim` ignored).
    pub fn coeff_at(&self, component: usize, k: [i64; 3]) -> Complex64 {
        let mut ix = [0usize; 3];
        for a in 0..self.grid.dim() {
            ix[a] = self.grid.index_of(k[a]);
        }
        self.block(component)[self.grid.ravel(ix)]
    }

    pub fn set_coeff_at(&mut self, component: usize, k: [i64; 3], value: Complex64) {
        let mut ix = [0usize; 3];
        for a in 0..self.grid.dim() {
            ix[a] = self.grid.index_of(k[a]);
        }
        let idx = self.grid.ravel(ix);
        self.block_mut(component)[idx] = value;
    }

    fn require_same_shape(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.components != other.components {
            return Err(Error::ShapeMismatch {
                expected: self.coeffs.len(),
                actual: other.coeffs.len(),
            });
        }
        Ok(())
    }

    pub fn to_real(&self) -> RealSamples {
        let len = self.grid.len();
        let mut work = self.coeffs.clone();
        for block in work.chunks_mut(len) {
            fft::transform(&self.grid, block, Direction::Inverse);
        }
        RealSamples {
            grid: self.grid,
            components: self.components,
            values: work.into_par_iter().map(|c| c.re).collect(),
        }
    }

    /// Restores `c(-k) = conj(c(k))` and a real mean by symmetric averaging.
    pub fn enforce_hermitian(&mut self) {
        let grid = self.grid;
        let len = grid.len();
        for block in self.coeffs.chunks_mut(len) {
            let src = block.to_vec();
            block.par_iter_mut().enumerate().for_each(|(idx, c)| {
                let partner = src[grid.conjugate_index(idx)].conj();
                *c = 0.5 * (src[idx] + partner);
            });
        }
    }

    /// Largest violation of Hermitian symmetry, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.grid.len();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for block in self.coeffs.chunks(len) {
            for (idx, c) in block.iter().enumerate() {
                let partner = block[self.grid.conjugate_index(idx)];
                worst = worst.max((c - partner.conj()).norm());
                scale = scale.max(c.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Wavevector used by odd-order operators: Nyquist components set to zero.
    #[inline]
    pub(crate) fn odd_wavevector(grid: &Grid, idx: usize) -> [f64; 3] {
        let ix = grid.unravel(idx);
        let mut k = [0.0; 3];
        for a in 0..grid.dim() {
            if ix[a] != grid.n() / 2 {
                k[a] = grid.wavenumber(ix[a]) as f64;
            }
        }
        k
    }

    /// Spectral partial derivative `∂/∂x_axis` applied to every component.
    pub fn derivative(&self, axis: usize) -> Result<SpectralField> {
        let dim = self.grid.dim();
        if axis >= dim {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        let grid = self.grid;
        let len = grid.len();
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let k = Self::odd_wavevector(&grid, i % len)[axis];
                c * Complex64::new(0.0, k)
            })
            .collect();
        Ok(SpectralField {
            grid,
            components: self.components,
            coeffs,
        })
    }

    /// Gradient of a scalar field (or of each component of a vector field):
    /// output component `c * dim + axis` is `∂_axis f_c`.
    pub fn gradient(&self) -> SpectralField {
        let dim = self.grid.dim();
        let mut parts = Vec::with_capacity(self.components * dim);
        for c in 0..self.components {
            let comp = self.component(c);
            for axis in 0..dim {
                parts.push(comp.derivative(axis).expect("axis < dim"));
            }
        }
        SpectralField::stack(&parts).expect("same grid")
    }

    pub fn divergence(&self) -> Result<SpectralField> {
        if !self.is_vector() {
            return Err(Error::NotAVectorField(self.components));
        }
        let grid = self.grid;
        let len = grid.len();
        let dim = grid.dim();
        let coeffs = (0..len)
            .into_par_iter()
            .map(|idx| {
                let k = Self::odd_wavevector(&grid, idx);
                (0..dim)
                    .map(|a| self.coeffs[a * len + idx] * Complex64::new(0.0, k[a]))
                    .sum()
            })
            .collect();
        Ok(SpectralField {
            grid,
            components: 1,
            coeffs,
        })
    }

    /// Largest `|k·c(k)|` over all modes.
    pub fn max_divergence_mode(&self) -> Result<f64> {
        Ok(self
            .divergence()?
            .coeffs
            .iter()
            .fold(0.0f64, |m, c| m.max(c.norm())))
    }

    /// Leray projection onto divergence-free fields, `c(k) ↦ (I - k kᵀ/|k|²) c(k)`.
    pub fn leray_project(&self) -> Result<SpectralField> {
        if !self.is_vector() {
            return Err(Error::NotAVectorField(self.components));
        }
        let grid = self.grid;
        let len = grid.len();
        let dim = grid.dim();
        let mut out = self.clone();
        let projected: Vec<[Complex64; 3]> = (0..len)
            .into_par_iter()
            .map(|idx| {
                let k = Self::odd_wavevector(&grid, idx);
                let k2: f64 = k.iter().map(|v| v * v).sum();
                let mut c = [Complex64::default(); 3];
                for a in 0..dim {
                    c[a] = self.coeffs[a * len + idx];
                }
                if k2 > 0.0 {
                    let kc: Complex64 = (0..dim).map(|a| c[a] * k[a]).sum::<Complex64>() / k2;
                    for a in 0..dim {
                        c[a] -= kc * k[a];
                    }
                }
                c
            })
            .collect();
        for (idx, c) in projected.iter().enumerate() {
            for a in 0..dim {
                out.coeffs[a * len + idx] = c[a];
            }
        }
        Ok(out)
    }

    /// 2/3-rule truncation: zero every mode with some `|k_axis| > n/3`.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        let len = grid.len();
        let cut = grid.dealias_cutoff();
        self.coeffs.par_iter_mut().enumerate().for_each(|(i, c)| {
            let k = grid.wavevector(i % len);
            if k.iter().any(|v| v.abs() > cut) {
                *c = Complex64::default();
            }
        });
    }

    /// Whether all coefficients outside the 2/3-rule set are exactly zero.
    pub fn is_dealiased(&self) -> bool {
        let len = self.grid.len();
        let cut = self.grid.dealias_cutoff();
        self.coeffs.iter().enumerate().all(|(i, c)| {
            let k = self.grid.wavevector(i % len);
            !k.iter().any(|v| v.abs() > cut) || *c == Complex64::default()
        })
    }

    /// Exact trigonometric interpolation onto a finer grid, or spectral
    /// truncation onto a coarser one. Nyquist coefficients are split evenly
    /// between `±n/2` when refining.
    pub fn resample(&self, target: Grid) -> Result<SpectralField> {
        if target.dim() != self.grid.dim() {
            return Err(Error::GridMismatch);
        }
        if target == self.grid {
            return Ok(self.clone());
        }
        let src = self.grid;
        let dim = src.dim();
        let half_src = (src.n() / 2) as i64;
        let half_dst = (target.n() / 2) as i64;
        let refining = target.n() > src.n();
        let tlen = target.len();
        let slen = src.len();
        let mut coeffs = vec![Complex64::default(); tlen * self.components];
        coeffs.par_iter_mut().enumerate().for_each(|(i, out)| {
            let comp = i / tlen;
            let k = target.wavevector(i % tlen);
            let mut weight = 1.0;
            let mut ix = [0usize; 3];
            for a in 0..dim {
                let ka = k[a];
                if refining {
                    if ka.abs() > half_src {
                        return;
                    }
                    if ka.abs() == half_src {
                        weight *= 0.5;
                    }
                } else if ka == -half_dst {
                    return;
                }
                ix[a] = src.index_of(ka);
            }
            *out = self.coeffs[comp * slen + src.ravel(ix)] * weight;
        });
        Ok(SpectralField {
            grid: target,
            components: self.components,
            coeffs,
        })
    }

    /// Multiplies every component by a real per-mode table.
    pub fn apply_multiplier(&self, table: &[f64]) -> Result<SpectralField> {
        let len = self.grid.len();
        if table.len() != len {
            return Err(Error::ShapeMismatch {
                expected: len,
                actual: table.len(),
            });
        }
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(i, c)| c * table[i % len])
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            components: self.components,
            coeffs,
        })
    }

    /// `L^p` norm over the torus. `p = 2` uses Parseval; other orders use
    /// equal-weight collocation quadrature, which converges spectrally for
    /// smooth integrands and algebraically when `|f|^p` has limited smoothness.
    pub fn lp_norm(&self, p: impl Into<LpOrder>) -> Result<f64> {
        match p.into() {
            LpOrder::Finite(p) if p == 2.0 => Ok(self.l2_norm_squared().sqrt()),
            order => self.to_real().lp_norm(order),
        }
    }

    /// `∫ |f|² dx` by Parseval.
    pub fn l2_norm_squared(&self) -> f64 {
        self.grid.volume() * self.coeffs.par_iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `∫ f·g dx` by Parseval.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.require_same_shape(other)?;
        let s: f64 = self
            .coeffs
            .par_iter()
            .zip(other.coeffs.par_iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.grid.volume() * s)
    }

    /// Kinetic energy `½ ∫ |u|² dx`.
    pub fn energy(&self) -> f64 {
        0.5 * self.l2_norm_squared()
    }

    /// `∫ |∇f|² dx = (2π)^d Σ |k|² |c(k)|²`.
    pub fn gradient_norm_squared(&self) -> f64 {
        let grid = self.grid;
        let len = grid.len();
        grid.volume()
            * self
                .coeffs
                .par_iter()
                .enumerate()
                .map(|(i, c)| grid.k_squared(i % len) as f64 * c.norm_sqr())
                .sum::<f64>()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            components: self.components,
            coeffs: self.coeffs.par_iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.require_same_shape(other)?;
        Ok(SpectralField {
            grid: self.grid,
            components: self.components,
            coeffs: self
                .coeffs
                .par_iter()
                .zip(other.coeffs.par_iter())
                .map(|(a, b)| a + b * s)
                .collect(),
        })
    }

    /// Largest absolute coefficient difference.
    pub fn max_coeff_diff(&self, other: &SpectralField) -> Result<f64> {
        self.require_same_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())))
    }
}
