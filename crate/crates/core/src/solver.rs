//! Pseudo-spectral integration of the forced incompressible Navier–Stokes
//! equations on the periodic box, with energy-budget tracking.
//!
//! Time stepping is classical RK4 applied to `v = e^{νk²t} û` (integrating
//! factor), so the viscous term is treated exactly. The quadratic term is
//! formed on the collocation lattice from a velocity whose spectrum lies in
//! the 2/3-rule band; the product is then exact on the retained modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{RealSamples, SpectralField};
use crate::grid::Grid;
use crate::quadrature::cumulative_simpson;
use crate::synthetic::{self, SyntheticKind, SyntheticSpec};

/// Courant number enforced at every step.
pub const CFL_LIMIT: f64 = 0.5;
/// Abort when `max|u|` exceeds this multiple of its initial value.
pub const BLOW_UP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    None,
    /// `f_i = A sin(k_f x_{(i+1) mod d})`: time-independent, solenoidal, mean-free.
    FixedLowMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSpec {
    pub kind: ForcingKind,
    pub amplitude: f64,
    pub k_f: u32,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec {
            kind: ForcingKind::None,
            amplitude: 0.0,
            k_f: 1,
        }
    }
}

impl ForcingSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn fixed_low_mode(amplitude: f64, k_f: u32) -> Self {
        ForcingSpec {
            kind: ForcingKind::FixedLowMode,
            amplitude,
            k_f,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        let dim = grid.dim();
        match self.kind {
            ForcingKind::None => Ok(SpectralField::zeros(*grid, dim)),
            ForcingKind::FixedLowMode => {
                if self.k_f < 1 || self.k_f as i64 > grid.dealias_cutoff() {
                    return Err(Error::Config(format!(
                        "forcing wavenumber {} outside [1, {}]",
                        self.k_f,
                        grid.dealias_cutoff()
                    )));
                }
                let (a, k) = (self.amplitude, self.k_f as f64);
                Ok(RealSamples::from_fn(*grid, dim, |x, c| a * (k * x[(c + 1) % dim]).sin())
                    .to_spectral())
            }
        }
    }
}

/// Initial velocity: a generator output, optionally plus a second one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub field: SyntheticSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<SyntheticSpec>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::from(SyntheticSpec::of_kind(SyntheticKind::TaylorGreen))
    }
}

impl From<SyntheticSpec> for InitialSpec {
    fn from(field: SyntheticSpec) -> Self {
        InitialSpec {
            field,
            perturbation: None,
        }
    }
}

impl InitialSpec {
    pub fn with_perturbation(mut self, p: SyntheticSpec) -> Self {
        self.perturbation = Some(p);
        self
    }

    /// Builds the (dealiased, projected) initial velocity.
    pub fn build(&self, grid: &Grid) -> Result<SpectralField> {
        let mut u = synthetic::generate(grid, &self.field)?;
        if let Some(p) = &self.perturbation {
            u = u.axpy(1.0, &synthetic::generate(grid, p)?)?;
        }
        u.dealias_in_place();
        u.leray_project()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: Grid,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl SolverConfig {
    pub fn new(grid: Grid, nu: f64, dt: f64, t_end: f64) -> Self {
        SolverConfig {
            grid,
            nu,
            dt,
            t_end,
            forcing: ForcingSpec::none(),
            initial: InitialSpec::default(),
            snapshot_stride: 1,
        }
    }

    /// Number of steps to reach `t_end`.
    pub fn steps(&self) -> Result<usize> {
        self.validate()?;
        Ok((self.t_end / self.dt).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("viscosity {} must be positive", self.nu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("time step {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end {} must be non-negative", self.t_end)));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::Config(format!(
                "t_end {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        if self.snapshot_stride == 0 || steps as usize % self.snapshot_stride != 0 {
            return Err(Error::Config(format!(
                "snapshot_stride {} must be positive and divide the step count {}",
                self.snapshot_stride, steps
            )));
        }
        Ok(())
    }
}

/// Velocity and pressure at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: SpectralField,
    pub p: SpectralField,
}

impl Snapshot {
    /// Snapshot with the pressure solved from `u` and `f`.
    pub fn new(t: f64, u: SpectralField, f: &SpectralField) -> Result<Self> {
        let p = solve_pressure(&u, f)?;
        Ok(Snapshot { t, u, p })
    }
}

/// Equally spaced snapshots of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub nu: f64,
    pub forcing: SpectralField,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Snapshot spacing, checking it is uniform.
    pub fn uniform_spacing(&self) -> Result<f64> {
        let s = &self.snapshots;
        if s.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "trajectory has {} snapshot(s); need at least 2",
                s.len()
            )));
        }
        let h = (s[s.len() - 1].t - s[0].t) / (s.len() - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::InvalidArgument("snapshot times must increase".into()));
        }
        for (i, snap) in s.iter().enumerate() {
            if (snap.t - s[0].t - i as f64 * h).abs() > 1e-9 * h {
                return Err(Error::InvalidArgument(format!(
                    "snapshot {i} at t = {} breaks uniform spacing {h}",
                    snap.t
                )));
            }
        }
        Ok(h)
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.snapshots.first().map(|s| s.u.grid())
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// Energy budget sampled every step, with running integrals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BudgetSeries {
    pub times: Vec<f64>,
    /// `½‖u‖₂²`
    pub kinetic_energy: Vec<f64>,
    /// `ν‖∇u‖₂²`
    pub viscous_dissipation: Vec<f64>,
    /// `∫u·f dx`
    pub injection: Vec<f64>,
    pub cumulative_dissipation: Vec<f64>,
    pub cumulative_injection: Vec<f64>,
}

impl BudgetSeries {
    /// `E(T) - E(0) + ∫ν‖∇u‖² - ∫∫u·f`
    pub fn balance_residual(&self) -> f64 {
        match self.kinetic_energy.len() {
            0 => 0.0,
            m => {
                self.kinetic_energy[m - 1] - self.kinetic_energy[0]
                    + self.cumulative_dissipation[m - 1]
                    - self.cumulative_injection[m - 1]
            }
        }
    }

    /// Balance residual relative to the total dissipation (absolute if that is zero).
    pub fn relative_balance_residual(&self) -> f64 {
        let r = self.balance_residual().abs();
        match self.cumulative_dissipation.last() {
            Some(d) if *d > 0.0 => r / d,
            _ => r,
        }
    }

    pub fn total_dissipation(&self) -> f64 {
        self.cumulative_dissipation.last().copied().unwrap_or(0.0)
    }

    fn push(&mut self, t: f64, u: &SpectralField, f: &SpectralField, nu: f64) -> Result<()> {
        self.times.push(t);
        self.kinetic_energy.push(u.energy());
        self.viscous_dissipation.push(nu * u.gradient_norm_squared());
        self.injection.push(u.inner(f)?);
        Ok(())
    }

    fn finish(&mut self, h: f64) {
        self.cumulative_dissipation = cumulative_simpson(&self.viscous_dissipation, h);
        self.cumulative_injection = cumulative_simpson(&self.injection, h);
    }
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub budget: BudgetSeries,
}

/// Mean-free pressure from `-Δp = ∇⊗∇:(u⊗u) - ∇·f`.
///
/// The products are formed on the refined lattice, where they are exact for
/// any `u` resolved on the base grid, and then truncated back.
pub fn solve_pressure(u: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    let grid = *u.grid();
    let dim = grid.dim();
    if u.components() != dim {
        return Err(Error::NotAVectorField(u.components()));
    }
    if f.grid() != &grid || f.components() != dim {
        return Err(Error::GridMismatch);
    }
    let fine = grid.refined();
    let ur = u.resample(fine)?.to_real();
    let pairs = pairs(dim);
    let mut prod = RealSamples::zeros(fine, pairs.len());
    for (c, &(i, j)) in pairs.iter().enumerate() {
        let (a, b) = (ur.component(i), ur.component(j));
        for (o, (x, y)) in prod.component_mut(c).iter_mut().zip(a.iter().zip(b)) {
            *o = x * y;
        }
    }
    let uu = prod.to_spectral().resample(grid)?;
    let mut p = SpectralField::zeros(grid, 1);
    let out = p.block_mut(0);
    for (idx, o) in out.iter_mut().enumerate() {
        let k2 = grid.k_squared(idx);
        if k2 == 0 {
            continue;
        }
        let kv = grid.wavevector(idx);
        let ko = SpectralField::odd_wavevector(&grid, idx);
        let mut acc = num_complex::Complex64::default();
        for (c, &(i, j)) in pairs.iter().enumerate() {
            let w = if i == j { 1.0 } else { 2.0 };
            acc -= uu.block(c)[idx] * (w * (kv[i] * kv[j]) as f64);
        }
        for a in 0..dim {
            acc -= num_complex::Complex64::i() * ko[a] * f.block(a)[idx];
        }
        *o = acc / k2 as f64;
    }
    p.enforce_hermitian();
    Ok(p)
}

fn pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut v = vec![];
    for i in 0..dim {
        for j in i..dim {
            v.push((i, j));
        }
    }
    v
}

/// Stepper with precomputed integrating factors.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: Grid,
    nu: f64,
    dt: f64,
    forcing: SpectralField,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    max_speed_limit: Option<f64>,
}

impl Solver {
    pub fn new(grid: Grid, nu: f64, dt: f64, forcing: SpectralField) -> Result<Self> {
        if !(nu >= 0.0 && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("need ν ≥ 0 and dt > 0, got {nu}, {dt}")));
        }
        if forcing.grid() != &grid || forcing.components() != grid.dim() {
            return Err(Error::GridMismatch);
        }
        let forcing = forcing.dealias().leray_project()?;
        let (e_full, e_half) = (0..grid.len())
            .map(|idx| {
                let k2 = grid.k_squared(idx) as f64;
                ((-nu * k2 * dt).exp(), (-0.5 * nu * k2 * dt).exp())
            })
            .unzip();
        Ok(Solver {
            grid,
            nu,
            dt,
            forcing,
            e_full,
            e_half,
            max_speed_limit: None,
        })
    }

    pub fn from_config(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Solver::new(cfg.grid, cfg.nu, cfg.dt, cfg.forcing.build(&cfg.grid)?)
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    /// Arms the blow-up guard relative to the speed of `u0`.
    pub fn arm_blow_up_guard(&mut self, u0: &SpectralField) {
        let m = max_speed(&u0.to_real());
        self.max_speed_limit = (m > 0.0).then_some(BLOW_UP_FACTOR * m);
    }

    /// `-P[∇·(u⊗u)] + f` on the dealiased band, and `max|u|`.
    fn rhs(&self, u: &SpectralField) -> Result<(SpectralField, f64)> {
        let grid = self.grid;
        let dim = grid.dim();
        let ur = u.to_real();
        let speed = max_speed(&ur);
        let pairs = pairs(dim);
        let mut prod = RealSamples::zeros(grid, pairs.len());
        for (c, &(i, j)) in pairs.iter().enumerate() {
            let (a, b) = (ur.component(i), ur.component(j));
            for (o, (x, y)) in prod.component_mut(c).iter_mut().zip(a.iter().zip(b)) {
                *o = x * y;
            }
        }
        let uu = prod.to_spectral();
        let slot = |i: usize, j: usize| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            pairs.iter().position(|&p| p == (a, b)).expect("pair present")
        };
        let mut out = SpectralField::zeros(grid, dim);
        for i in 0..dim {
            let slots: Vec<usize> = (0..dim).map(|j| slot(i, j)).collect();
            let blk = out.block_mut(i);
            for (idx, o) in blk.iter_mut().enumerate() {
                let k = SpectralField::odd_wavevector(&grid, idx);
                let mut acc = num_complex::Complex64::default();
                for (j, &s) in slots.iter().enumerate() {
                    acc += uu.block(s)[idx] * k[j];
                }
                *o = -num_complex::Complex64::i() * acc;
            }
        }
        out.dealias_in_place();
        let out = out.leray_project()?.axpy(1.0, &self.forcing)?;
        Ok((out, speed))
    }

    /// Advances `u` from time `t` by one step.
    pub fn step(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        if u.grid() != &self.grid || u.components() != self.grid.dim() {
            return Err(Error::GridMismatch);
        }
        let dt = self.dt;
        let (a, speed) = self.rhs(u)?;
        if !speed.is_finite() {
            return Err(Error::NonFinite { t });
        }
        if let Some(limit) = self.max_speed_limit {
            if speed > limit {
                return Err(Error::BlowUp {
                    t,
                    max_u: speed,
                    limit,
                });
            }
        }
        if speed > 0.0 {
            let limit = CFL_LIMIT * self.grid.spacing() / speed;
            if dt > limit {
                return Err(Error::CflViolation { t, dt, limit });
            }
        }
        let combine = |f: &dyn Fn(usize, usize) -> num_complex::Complex64| {
            let mut out = SpectralField::zeros(self.grid, self.grid.dim());
            let len = self.grid.len();
            for (pos, o) in out.coeffs_mut().iter_mut().enumerate() {
                *o = f(pos, pos % len);
            }
            out
        };
        let (eh, ef) = (&self.e_half, &self.e_full);
        let uc = u.coeffs();
        let u1 = combine(&|p, k| eh[k] * (uc[p] + 0.5 * dt * a.coeffs()[p]));
        let (b, _) = self.rhs(&u1)?;
        let u2 = combine(&|p, k| eh[k] * uc[p] + 0.5 * dt * b.coeffs()[p]);
        let (c, _) = self.rhs(&u2)?;
        let u3 = combine(&|p, k| ef[k] * uc[p] + dt * eh[k] * c.coeffs()[p]);
        let (d, _) = self.rhs(&u3)?;
        let mut next = combine(&|p, k| {
            ef[k] * uc[p]
                + dt / 6.0
                    * (ef[k] * a.coeffs()[p]
                        + 2.0 * eh[k] * (b.coeffs()[p] + c.coeffs()[p])
                        + d.coeffs()[p])
        });
        next.enforce_hermitian();
        if next.coeffs().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { t: t + dt });
        }
        Ok(next)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

fn max_speed(r: &RealSamples) -> f64 {
    r.magnitude().into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// One step from snapshot `s` under `cfg`; the returned pressure is re-solved.
pub fn step(s: &Snapshot, cfg: &SolverConfig) -> Result<Snapshot> {
    let solver = Solver::new(cfg.grid, cfg.nu, cfg.dt, cfg.forcing.build(&cfg.grid)?)?;
    let u = solver.step(&s.u, s.t)?;
    Snapshot::new(s.t + cfg.dt, u, solver.forcing())
}

/// Integrates from the configured initial condition to `t_end`.
pub fn run(cfg: &SolverConfig) -> Result<RunOutput> {
    let u0 = cfg.initial.build(&cfg.grid)?;
    run_from(cfg, u0)
}

/// Integrates from an explicit initial velocity; `cfg.initial` is ignored.
pub fn run_from(cfg: &SolverConfig, u0: SpectralField) -> Result<RunOutput> {
    let steps = cfg.steps()?;
    let mut solver = Solver::from_config(cfg)?;
    if u0.grid() != &cfg.grid || u0.components() != cfg.grid.dim() {
        return Err(Error::GridMismatch);
    }
    solver.arm_blow_up_guard(&u0);
    let f = solver.forcing().clone();
    let mut budget = BudgetSeries::default();
    let mut snapshots = vec![];
    let mut u = u0;
    let report_every = (steps / 10).max(1);
    for i in 0..=steps {
        let t = i as f64 * cfg.dt;
        budget.push(t, &u, &f, cfg.nu)?;
        if i % cfg.snapshot_stride == 0 {
            snapshots.push(Snapshot::new(t, u.clone(), &f)?);
        }
        if i == steps {
            break;
        }
        u = solver.step(&u, t)?;
        if (i + 1) % report_every == 0 {
            log::info!("step {}/{steps}, t = {:.4}, E = {:.6e}", i + 1, t + cfg.dt, u.energy());
        }
    }
    budget.finish(cfg.dt);
    Ok(RunOutput {
        trajectory: Trajectory {
            nu: cfg.nu,
            forcing: f,
            snapshots,
        },
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let g = grid(16);
        let s = Solver::new(g, 0.1, 1e-2, SpectralField::zeros(g, 2)).unwrap();
        let u = s.step(&SpectralField::zeros(g, 2), 0.0).unwrap();
        assert_eq!(u.max_abs_coeff(), 0.0);
    }

    #[test]
    fn shear_pressure_vanishes() {
        let g = grid(16);
        let p = solve_pressure(&synthetic::shear(&g), &SpectralField::zeros(g, 2)).unwrap();
        assert!(p.max_abs_coeff() < 1e-16);
    }

    #[test]
    fn taylor_green_pressure_closed_form() {
        let g = grid(32);
        let p = solve_pressure(&synthetic::taylor_green(&g), &SpectralField::zeros(g, 2)).unwrap();
        let r = p.to_real();
        for idx in 0..g.len() {
            let x = g.position(idx);
            let exact = 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos());
            assert!((r.values()[idx] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = grid(16);
        let s = Solver::new(g, 0.1, 1.0, SpectralField::zeros(g, 2)).unwrap();
        let err = s.step(&synthetic::shear(&g), 0.0).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn config_validation() {
        let g = grid(16);
        let mut c = SolverConfig::new(g, 0.1, 0.01, 0.105);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.t_end = 0.1;
        c.snapshot_stride = 3;
        assert!(c.validate().is_err());
        c.snapshot_stride = 5;
        assert_eq!(c.steps().unwrap(), 10);
        c.nu = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn forcing_is_solenoidal() {
        let g = grid(16);
        let f = ForcingSpec::fixed_low_mode(0.3, 2).build(&g).unwrap();
        assert!(f.max_divergence_mode().unwrap() < 1e-15);
        assert!(f.coeffs()[0].norm() < 1e-16);
        assert!(ForcingSpec::fixed_low_mode(1.0, 9).build(&g).is_err());
    }
}
