//! Deterministic test fields: closed-form flows and random-phase fields of
//! prescribed regularity.
//!
//! Random fields draw from ChaCha20 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`, visiting wavevectors in increasing linear
//! index order and consuming draws only for the canonical member of each
//! `±k` pair. The same spec therefore yields bit-identical coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{RealSamples, SpectralField};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Zero,
    RandomBesov,
    SingleMode,
    Shear,
    TaylorGreen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    /// Target regularity (random_besov only).
    pub sigma: f64,
    pub seed: u64,
    pub k_min: u32,
    /// Upper end of the spectral band; 0 means `n/3`.
    pub k_max: u32,
    /// Overall scale. For random_besov this is the `L²` norm of the result.
    pub amplitude: f64,
    /// Wavevector for single_mode.
    pub wavevector: [i64; 3],
    /// Component carrying the single mode.
    pub axis: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            kind: SyntheticKind::Zero,
            sigma: 0.5,
            seed: 0,
            k_min: 1,
            k_max: 0,
            amplitude: 1.0,
            wavevector: [1, 0, 0],
            axis: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn of_kind(kind: SyntheticKind) -> Self {
        SyntheticSpec {
            kind,
            ..Default::default()
        }
    }

    pub fn random_besov(sigma: f64, seed: u64) -> Self {
        SyntheticSpec {
            kind: SyntheticKind::RandomBesov,
            sigma,
            seed,
            ..Default::default()
        }
    }

    pub fn with_band(mut self, k_min: u32, k_max: u32) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Builds the field described by `spec`.
pub fn generate(grid: &Grid, spec: &SyntheticSpec) -> Result<SpectralField> {
    let base = match spec.kind {
        SyntheticKind::Zero => return Ok(SpectralField::zeros(*grid, grid.dim())),
        SyntheticKind::RandomBesov => return random_besov_field(grid, spec),
        SyntheticKind::SingleMode => single_mode(grid, spec.wavevector, spec.axis)?,
        SyntheticKind::Shear => shear(grid),
        SyntheticKind::TaylorGreen => taylor_green(grid),
    };
    Ok(base.scale(spec.amplitude))
}

/// `(sin x cos y, -cos x sin y)` in 2-D, with an extra `cos z` factor and a
/// zero third component in 3-D.
pub fn taylor_green(grid: &Grid) -> SpectralField {
    let dim = grid.dim();
    RealSamples::from_fn(*grid, dim, |x, c| {
        let zf = if dim == 3 { x[2].cos() } else { 1.0 };
        match c {
            0 => x[0].sin() * x[1].cos() * zf,
            1 => -x[0].cos() * x[1].sin() * zf,
            _ => 0.0,
        }
    })
    .to_spectral()
}

/// `(sin y, 0[, 0])`.
pub fn shear(grid: &Grid) -> SpectralField {
    RealSamples::from_fn(*grid, grid.dim(), |x, c| if c == 0 { x[1].sin() } else { 0.0 })
        .to_spectral()
}

/// `e_axis sin(k·x)`; rejected unless `k·e_axis = 0` so the field is solenoidal.
pub fn single_mode(grid: &Grid, k: [i64; 3], axis: usize) -> Result<SpectralField> {
    let dim = grid.dim();
    if axis >= dim {
        return Err(Error::AxisOutOfRange { axis, dim });
    }
    if k[axis] != 0 {
        return Err(Error::InvalidArgument(format!(
            "single mode k = {k:?} along axis {axis} is not solenoidal"
        )));
    }
    if k.iter().take(dim).all(|&v| v == 0) || k.iter().skip(dim).any(|&v| v != 0) {
        return Err(Error::InvalidArgument(format!("invalid wavevector {k:?}")));
    }
    let half = (grid.n() / 2) as i64;
    if k.iter().take(dim).any(|v| v.abs() >= half) {
        return Err(Error::InvalidArgument(format!(
            "wavevector {k:?} not resolved on n = {}",
            grid.n()
        )));
    }
    let mut f = SpectralField::zeros(*grid, dim);
    f.set_coeff_at(axis, k, Complex64::new(0.0, -0.5));
    f.set_coeff_at(axis, [-k[0], -k[1], -k[2]], Complex64::new(0.0, 0.5));
    Ok(f)
}

fn is_canonical(k: &[i64; 3]) -> bool {
    for &v in k {
        if v != 0 {
            return v > 0;
        }
    }
    false
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Isotropic random-phase solenoidal field with shell spectrum
/// `E(k) ∝ k^{-(2σ+1)}` on `k_min ≤ |k| ≤ k_max`, scaled to `‖u‖₂ = amplitude`.
///
/// Each mode carries `|û(k)|² ∝ |k|^{-(2σ+d)}`, so summing over a shell of
/// area `∝ k^{d-1}` gives `k^{-(2σ+1)}`. Then
/// `S₂(r) ∝ ∫ E(k)(1 - cos kr) dk ∝ r^{2σ}` for `2π/k_max ≪ r ≪ 2π/k_min`.
pub fn random_besov_field(grid: &Grid, spec: &SyntheticSpec) -> Result<SpectralField> {
    let sigma = spec.sigma;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("σ = {sigma} not in (0, 1)")));
    }
    let cutoff = grid.dealias_cutoff() as u32;
    let k_max = if spec.k_max == 0 { cutoff } else { spec.k_max };
    if spec.k_min < 1 || k_max > cutoff || spec.k_min > k_max {
        return Err(Error::Domain(format!(
            "band [{}, {}] invalid for n = {} (need 1 ≤ k_min ≤ k_max ≤ {cutoff})",
            spec.k_min,
            k_max,
            grid.n()
        )));
    }
    if !(spec.amplitude >= 0.0) {
        return Err(Error::Domain(format!("amplitude {} must be ≥ 0", spec.amplitude)));
    }
    let dim = grid.dim();
    let len = grid.len();
    let exponent = -(2.0 * sigma + dim as f64) / 2.0;
    let (kmin, kmax) = (spec.k_min as f64, k_max as f64);
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut f = SpectralField::zeros(*grid, dim);
    for idx in 0..len {
        let k = grid.wavevector(idx);
        if !is_canonical(&k) {
            continue;
        }
        let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
        let kmag = (kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2]).sqrt();
        if kmag < kmin || kmag > kmax {
            continue;
        }
        let amp = kmag.powf(exponent);
        let mut c = [Complex64::default(); 3];
        if dim == 2 {
            let theta = 2.0 * PI * rng.gen::<f64>();
            let e = [-kf[1] / kmag, kf[0] / kmag];
            let z = Complex64::from_polar(amp, theta);
            c[0] = z * e[0];
            c[1] = z * e[1];
        } else {
            let khat = normalize(kf);
            let helper = if khat[0].abs() <= khat[1].abs() && khat[0].abs() <= khat[2].abs() {
                [1.0, 0.0, 0.0]
            } else if khat[1].abs() <= khat[2].abs() {
                [0.0, 1.0, 0.0]
            } else {
                [0.0, 0.0, 1.0]
            };
            let e1 = normalize(cross(khat, helper));
            let e2 = cross(khat, e1);
            let beta = 2.0 * PI * rng.gen::<f64>();
            let t1 = 2.0 * PI * rng.gen::<f64>();
            let t2 = 2.0 * PI * rng.gen::<f64>();
            let z1 = Complex64::from_polar(amp * beta.cos(), t1);
            let z2 = Complex64::from_polar(amp * beta.sin(), t2);
            for a in 0..3 {
                c[a] = z1 * e1[a] + z2 * e2[a];
            }
        }
        let conj_idx = grid.conjugate_index(idx);
        for (a, ca) in c.iter().enumerate().take(dim) {
            f.block_mut(a)[idx] = *ca;
            f.block_mut(a)[conj_idx] = ca.conj();
        }
    }
    let f = f.leray_project()?;
    let norm = f.l2_norm_squared().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("spectral band contains no modes".into()));
    }
    Ok(f.scale(spec.amplitude / norm))
}

/// Unstructured random real vector field (all resolved modes, not
/// solenoidal); used for property checks of linear operators.
pub fn random_vector_field(grid: &Grid, seed: u64) -> SpectralField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let values = (0..grid.len() * dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    RealSamples::new(*grid, dim, values)
        .expect("sized to grid")
        .to_spectral()
}

/// Shell-summed energy `E(k) = Σ_{round|k| = k} ½|û|²·(2π)^d` for `k = 0..=kmax`.
pub fn shell_spectrum(u: &SpectralField) -> Vec<f64> {
    let grid = u.grid();
    let len = grid.len();
    let kmax = ((grid.dim() as f64).sqrt() * grid.n() as f64 / 2.0).ceil() as usize + 1;
    let mut e = vec![0.0; kmax + 1];
    for idx in 0..len {
        let shell = (grid.k_squared(idx) as f64).sqrt().round() as usize;
        let s: f64 = (0..u.components()).map(|c| u.block(c)[idx].norm_sqr()).sum();
        e[shell] += 0.5 * s * grid.volume();
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = Grid::new(2, 32).unwrap();
        let spec = SyntheticSpec::random_besov(0.4, 17);
        let a = random_besov_field(&g, &spec).unwrap();
        let b = random_besov_field(&g, &spec).unwrap();
        assert!(a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        let c = random_besov_field(&g, &SyntheticSpec::random_besov(0.4, 18)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_field_postconditions() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16).unwrap();
            let u = random_besov_field(&g, &SyntheticSpec::random_besov(0.3, 1)).unwrap();
            assert!(u.max_divergence_mode().unwrap() < 1e-13);
            assert!((u.l2_norm_squared().sqrt() - 1.0).abs() < 1e-12);
            assert!(u.hermitian_defect() < 1e-15);
            assert!(u.is_dealiased());
        }
    }

    #[test]
    fn random_field_rejects_bad_inputs() {
        let g = Grid::new(2, 32).unwrap();
        for spec in [
            SyntheticSpec::random_besov(0.0, 1),
            SyntheticSpec::random_besov(1.0, 1),
            SyntheticSpec::random_besov(0.5, 1).with_band(0, 4),
            SyntheticSpec::random_besov(0.5, 1).with_band(1, 11),
            SyntheticSpec::random_besov(0.5, 1).with_band(6, 5),
        ] {
            assert!(matches!(random_besov_field(&g, &spec), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn closed_form_flows_are_solenoidal() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16).unwrap();
            assert_eq!(shear(&g).max_divergence_mode().unwrap(), 0.0);
            assert!(taylor_green(&g).max_divergence_mode().unwrap() < 1e-15);
        }
    }

    #[test]
    fn taylor_green_energy() {
        let g = Grid::new(2, 32).unwrap();
        let e = taylor_green(&g).energy();
        assert!((e - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn single_mode_checks_solenoidality() {
        let g = Grid::new(2, 16).unwrap();
        let f = single_mode(&g, [1, 0, 0], 1).unwrap();
        let r = f.to_real();
        for idx in 0..g.len() {
            let x = g.position(idx);
            assert!(r.component(0)[idx].abs() < 1e-15);
            assert!((r.component(1)[idx] - x[0].sin()).abs() < 1e-14);
        }
        assert!(single_mode(&g, [1, 0, 0], 0).is_err());
        assert!(single_mode(&g, [0, 0, 0], 0).is_err());
        assert!(single_mode(&g, [1, 0, 0], 2).is_err());
    }
}
