//! Built-in regression suite against exact solutions.


use crate::coarse::{cumulant, Mollifier};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::solver::{self, solve_pressure, SolverConfig};
use crate::stats::{alpha_of_sigma, sigma_of_alpha, structure_function_along};
use crate::synthetic::{self, SyntheticKind, SyntheticSpec};

use super::snapshot::SnapshotFile;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: Result<f64>, tol: f64) -> CheckResult {
    match value {
        Ok(v) => CheckResult {
            name,
            passed: v < tol,
            detail: format!("{v:.3e} (tolerance {tol:e})"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn decay_error(kind: SyntheticKind, n: usize, nu: f64, rate: f64) -> Result<(f64, f64)> {
    let grid = Grid::new(2, n)?;
    let mut cfg = SolverConfig::new(grid, nu, 1e-3, 1.0);
    cfg.initial = SyntheticSpec::of_kind(kind).into();
    cfg.snapshot_stride = 1000;
    let out = solver::run(&cfg)?;
    let last = out.trajectory.snapshots.last().expect("final snapshot");
    let exact = cfg.initial.build(&grid)?.scale((-rate * nu * last.t).exp());
    let err = last.u.axpy(-1.0, &exact)?.to_real().max_abs();
    Ok((err, out.budget.relative_balance_residual()))
}

fn split(r: Result<(f64, f64)>) -> (Result<f64>, Result<f64>) {
    match r {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => {
            let msg = e.to_string();
            (Err(e), Err(Error::InvalidArgument(msg)))
        }
    }
}

/// Runs every regression; fast enough for routine use.
pub fn run_checks() -> Vec<CheckResult> {
    let mut out = vec![];
    let shear = decay_error(SyntheticKind::Shear, 32, 0.1, 1.0);
    let tg = decay_error(SyntheticKind::TaylorGreen, 64, 0.05, 2.0);
    let (shear_err, shear_balance) = split(shear);
    let (tg_err, tg_balance) = split(tg);
    out.push(outcome("shear decay, max error", shear_err, 1e-10));
    out.push(outcome("shear decay, energy balance", shear_balance, 1e-5));
    out.push(outcome("taylor-green decay, max error", tg_err, 1e-8));
    out.push(outcome("taylor-green decay, energy balance", tg_balance, 1e-5));

    out.push(outcome(
        "taylor-green pressure",
        (|| {
            let g = Grid::new(2, 32)?;
            let p = solve_pressure(&synthetic::taylor_green(&g), &SpectralField::zeros(g, 2))?;
            let r = p.to_real();
            Ok((0..g.len())
                .map(|i| {
                    let x = g.position(i);
                    (r.values()[i] - 0.25 * ((2.0 * x[0]).cos() + (2.0 * x[1]).cos())).abs()
                })
                .fold(0.0, f64::max))
        })(),
        1e-13,
    ));

    out.push(outcome(
        "second-order structure function of sin x",
        (|| {
            let g = Grid::new(2, 64)?;
            let u = crate::field::RealSamples::from_fn(g, 2, |x, c| if c == 0 { x[0].sin() } else { 0.0 });
            let seps: Vec<f64> = (1..g.n()).map(|m| m as f64 * g.spacing()).collect();
            let t = structure_function_along(&u, &[2.0], &seps, &[[1, 0, 0]])?;
            Ok(seps
                .iter()
                .zip(&t.values[0])
                .map(|(r, s)| (s - (1.0 - r.cos())).abs())
                .fold(0.0, f64::max))
        })(),
        1e-12,
    ));

    out.push(outcome(
        "exponent round trip",
        (|| {
            let mut worst: f64 = (sigma_of_alpha(0.0)? - 1.0 / 3.0).abs();
            for i in 0..100 {
                let a = i as f64 / 100.0;
                worst = worst.max((alpha_of_sigma(sigma_of_alpha(a)?)? - a).abs());
            }
            Ok(worst)
        })(),
        1e-14,
    ));

    out.push(outcome(
        "cumulant convexity",
        (|| {
            let g = Grid::new(2, 32)?;
            let m = Mollifier::bump();
            let mut worst = 0.0f64;
            for seed in 0..5 {
                let u = synthetic::random_besov_field(&g, &SyntheticSpec::random_besov(0.3, seed))?;
                let umax = u.to_real().magnitude().into_iter().fold(0.0, f64::max);
                let tr = cumulant(&u, &u, 0.4, &m)?.trace();
                let min = tr.iter().copied().fold(f64::INFINITY, f64::min);
                worst = worst.max(-min / (umax * umax));
            }
            Ok(worst)
        })(),
        1e-12,
    ));

    out.push(outcome(
        "snapshot round trip",
        (|| {
            let g = Grid::new(2, 16)?;
            let u = synthetic::random_besov_field(&g, &SyntheticSpec::random_besov(0.5, 9))?;
            let s = solver::Snapshot::new(0.25, u, &SpectralField::zeros(g, 2))?;
            let file = SnapshotFile::from_snapshot(1e-3, &s);
            let bytes = file.to_bytes();
            let back = SnapshotFile::from_bytes(&bytes)?;
            Ok(if back.to_bytes() == bytes && back == file { 0.0 } else { 1.0 })
        })(),
        0.5,
    ));

    out
}
