//! Configuration, persistence and the command implementations behind the
//! `lflx` binary.

pub mod check;
pub mod cli;
pub mod config;
pub mod output;
pub mod snapshot;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::coarse::{global_identity, resolved_balance_residual, FluxBudget};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{self, BudgetSeries, SolverConfig, Trajectory};
use crate::stats::{
    self, besov_estimate, c0_ratio, flux_scaling_report, onsager_report, structure_function,
    OnsagerReport, OnsagerSettings, StructureFunctionTable, SweepMember,
};
use crate::synthetic::{self, SyntheticSpec};

pub use config::ExperimentConfig;
pub use output::Csv;
pub use snapshot::{load_snapshot, save_snapshot, LoadedSnapshot, SnapshotFile};

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub nu: Option<Vec<f64>>,
    pub ell: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// `--nu` replaces the sweep list and, if it has one entry, the run viscosity.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(nus) = &self.nu {
            if nus.len() == 1 {
                cfg.solver.nu = nus[0];
            }
            cfg.sweep.nus = nus.clone();
        }
        if let Some(ells) = &self.ell {
            cfg.analysis.ells = ells.clone();
        }
        if let Some(seed) = self.seed {
            cfg.solver.initial.field.seed = seed;
            if !cfg.sweep.seeds.is_empty() {
                cfg.sweep.seeds = vec![seed];
            }
            cfg.analysis.flux_scaling.seeds = vec![seed];
        }
        cfg.validate()
    }
}

fn snapshot_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.dir.join("snapshots")
}

fn budget_csv(budget: &BudgetSeries) -> Csv {
    let mut csv = Csv::new(&[
        "t",
        "kinetic_energy",
        "viscous_dissipation",
        "injection",
        "cumulative_dissipation",
        "cumulative_injection",
    ]);
    for i in 0..budget.times.len() {
        csv.push_reals(&[
            budget.times[i],
            budget.kinetic_energy[i],
            budget.viscous_dissipation[i],
            budget.injection[i],
            budget.cumulative_dissipation[i],
            budget.cumulative_injection[i],
        ]);
    }
    csv
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub steps: usize,
    pub snapshots: Vec<PathBuf>,
    pub final_time: f64,
    pub energy_balance_residual: f64,
    pub relative_energy_balance_residual: f64,
    pub total_dissipation: f64,
}

/// Runs the solver; writes snapshots, `budget.csv` and `simulate.json`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulateSummary> {
    let out = solver::run(&cfg.solver)?;
    let dir = snapshot_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut paths = vec![];
    for (i, s) in out.trajectory.snapshots.iter().enumerate() {
        let path = dir.join(format!("snap_{i:05}.lflx"));
        save_snapshot(&path, &SnapshotFile::from_snapshot(cfg.solver.nu, s))?;
        paths.push(path);
    }
    budget_csv(&out.budget).write(cfg.output.dir.join("budget.csv"), cfg)?;
    let summary = SimulateSummary {
        steps: cfg.solver.steps()?,
        snapshots: paths,
        final_time: out.budget.times.last().copied().unwrap_or(0.0),
        energy_balance_residual: out.budget.balance_residual(),
        relative_energy_balance_residual: out.budget.relative_balance_residual(),
        total_dissipation: out.budget.total_dissipation(),
    };
    output::write_json(cfg.output.dir.join("simulate.json"), cfg, &summary)?;
    Ok(summary)
}

/// Loads every `*.lflx` file in `dir`, in name order.
pub fn load_snapshot_dir(dir: &Path) -> Result<Vec<LoadedSnapshot>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lflx"))
        .collect();
    paths.sort();
    paths.iter().map(load_snapshot).collect()
}

/// Trajectory assembled from the snapshots written by [`simulate`].
pub fn load_trajectory(cfg: &ExperimentConfig) -> Result<Trajectory> {
    let loaded = load_snapshot_dir(&snapshot_dir(cfg))?;
    let first = loaded
        .first()
        .ok_or_else(|| Error::InvalidArgument("no snapshots found; run simulate first".into()))?;
    let grid = *first.file.velocity.grid();
    Ok(Trajectory {
        nu: first.file.nu,
        forcing: cfg.solver.forcing.build(&grid)?,
        snapshots: loaded.iter().map(|l| l.file.to_snapshot()).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetSummary {
    pub identities: Vec<FluxBudget>,
    pub max_relative_closure: f64,
    pub max_relative_local_residual: Option<f64>,
}

/// Global identity and local balance residual for each configured scale.
pub fn budget(cfg: &ExperimentConfig) -> Result<BudgetSummary> {
    let traj = load_trajectory(cfg)?;
    let m = cfg.analysis.mollifier();
    let mut identity = Csv::new(&[
        "ell",
        "flux_integral",
        "resolved_dissipation",
        "initial_cumulant",
        "final_cumulant",
        "forcing_cumulant",
        "lhs_total_dissipation",
        "relative_residual",
    ]);
    let mut local = Csv::new(&["ell", "t", "residual_l2", "scale"]);
    let mut identities = vec![];
    let mut worst_local: Option<f64> = None;
    for &ell in &cfg.analysis.ells {
        let b = global_identity(&traj, ell, &m)?;
        identity.push_reals(&[
            ell,
            b.flux_integral,
            b.resolved_dissipation,
            b.initial_cumulant,
            b.final_cumulant,
            b.forcing_cumulant,
            b.lhs_total_dissipation,
            b.relative_residual(),
        ]);
        identities.push(b);
        if traj.snapshots.len() >= 5 {
            let r = resolved_balance_residual(&traj, ell, &m)?;
            for i in 0..r.times.len() {
                local.push_reals(&[ell, r.times[i], r.residual_l2[i], r.scale[i]]);
            }
            worst_local = Some(worst_local.unwrap_or(0.0).max(r.max_relative()));
        }
    }
    identity.write(cfg.output.dir.join("identity.csv"), cfg)?;
    if !local.is_empty() {
        local.write(cfg.output.dir.join("local_balance.csv"), cfg)?;
    }
    let summary = BudgetSummary {
        max_relative_closure: identities
            .iter()
            .map(|b| b.relative_residual())
            .fold(0.0, f64::max),
        identities,
        max_relative_local_residual: worst_local,
    };
    output::write_json(cfg.output.dir.join("budget.json"), cfg, &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureSummary {
    pub times: Vec<f64>,
    pub exponents: Vec<Vec<Option<f64>>>,
    pub tables: Vec<StructureFunctionTable>,
}

/// Structure functions and Besov estimates of stored snapshots, or of the
/// configured initial field when there are none.
pub fn structure(cfg: &ExperimentConfig) -> Result<StructureSummary> {
    let dir = snapshot_dir(cfg);
    let fields: Vec<(f64, crate::field::SpectralField)> = if dir.is_dir() {
        load_snapshot_dir(&dir)?
            .into_iter()
            .map(|l| (l.file.t, l.file.velocity.to_spectral()))
            .collect()
    } else {
        vec![(0.0, cfg.solver.initial.build(&cfg.solver.grid)?)]
    };
    let a = &cfg.analysis;
    let (r0, r1) = cfg.fit_window();
    let mut sf = Csv::new(&["t", "p", "r", "s_p"]);
    let mut besov = Csv::new(&["t", "p", "sigma", "c0", "c1", "norm", "zeta_p", "c0_ratio_slope"]);
    let mut summary = StructureSummary {
        times: vec![],
        exponents: vec![],
        tables: vec![],
    };
    for (t, u) in &fields {
        let seps = if a.separations.is_empty() {
            stats::dyadic_separations(u.grid(), 0.0, std::f64::consts::PI)
        } else {
            a.separations.clone()
        };
        let table = structure_function(u, &a.orders, &seps)?;
        let mut zetas = vec![];
        for (i, &p) in a.orders.iter().enumerate() {
            for (r, v) in table.separations.iter().zip(&table.values[i]) {
                sf.push_reals(&[*t, p, *r, *v]);
            }
            let b = besov_estimate(&table, p, a.besov_sigma, a.ell0)?;
            let zeta = table.exponent(p, r0, r1).ok().map(|f| f.slope);
            let ratio = c0_ratio(&table, p, a.besov_sigma)?;
            besov.push_reals(&[
                *t,
                p,
                a.besov_sigma,
                b.c0,
                b.c1,
                b.norm,
                zeta.unwrap_or(f64::NAN),
                ratio.small_r_slope.unwrap_or(f64::NAN),
            ]);
            zetas.push(zeta);
        }
        summary.times.push(*t);
        summary.exponents.push(zetas);
        summary.tables.push(table);
    }
    sf.write(cfg.output.dir.join("structure.csv"), cfg)?;
    besov.write(cfg.output.dir.join("besov.csv"), cfg)?;
    output::write_json(cfg.output.dir.join("structure.json"), cfg, &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxScalingEntry {
    pub sigma: f64,
    pub flux_slope: Option<f64>,
    pub cumulant_slope: Option<f64>,
    pub dissipation_slope: Option<f64>,
    pub flux_target: f64,
    pub cumulant_target: f64,
    pub dissipation_target: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxScalingSummary {
    pub entries: Vec<FluxScalingEntry>,
}

/// Synthetic ensembles of random fields for each `σ`.
pub fn ensemble(grid: &Grid, sigma: f64, seeds: &[u64]) -> Result<Vec<crate::field::SpectralField>> {
    seeds
        .iter()
        .map(|&s| synthetic::random_besov_field(grid, &SyntheticSpec::random_besov(sigma, s)))
        .collect()
}

/// Coarse-grained term norms versus `ℓ` on synthetic ensembles.
pub fn flux_scaling(cfg: &ExperimentConfig) -> Result<FluxScalingSummary> {
    let fs = &cfg.analysis.flux_scaling;
    let grid = Grid::new(2, fs.n)?;
    let ells = fs.scales();
    let m = cfg.analysis.mollifier();
    let mut csv = Csv::new(&[
        "sigma",
        "seed",
        "ell",
        "flux_l1",
        "cumulant_l1",
        "resolved_dissipation",
    ]);
    let mut entries = vec![];
    for &sigma in &fs.sigmas {
        let fields = ensemble(&grid, sigma, &fs.seeds)?;
        let rep = flux_scaling_report(&fields, &ells, fs.nu, &m)?;
        for (row, seed) in rep.rows.iter().zip(&fs.seeds) {
            for (i, ell) in ells.iter().enumerate() {
                csv.push(vec![
                    output::real(sigma),
                    seed.to_string(),
                    output::real(*ell),
                    output::real(row.flux_l1[i]),
                    output::real(row.cumulant_l1[i]),
                    output::real(row.resolved_dissipation[i]),
                ]);
            }
        }
        entries.push(FluxScalingEntry {
            sigma,
            flux_slope: rep.flux_slope,
            cumulant_slope: rep.cumulant_slope,
            dissipation_slope: rep.dissipation_slope,
            flux_target: 3.0 * sigma - 1.0,
            cumulant_target: 2.0 * sigma,
            dissipation_target: 2.0 * (sigma - 1.0),
        });
    }
    csv.write(cfg.output.dir.join("flux_scaling.csv"), cfg)?;
    let summary = FluxScalingSummary { entries };
    output::write_json(cfg.output.dir.join("flux_scaling.json"), cfg, &summary)?;
    Ok(summary)
}

/// Runs one sweep member and reduces it to budgets and structure tables.
pub fn sweep_member(solver_cfg: &SolverConfig, orders: &[f64], separations: &[f64]) -> Result<SweepMember> {
    let out = solver::run(solver_cfg)?;
    let tables = out
        .trajectory
        .snapshots
        .iter()
        .map(|s| structure_function(&s.u, orders, separations))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepMember {
        nu: solver_cfg.nu,
        budget: out.budget,
        times: out.trajectory.times(),
        tables,
    })
}

fn mean_budget(parts: &[BudgetSeries]) -> BudgetSeries {
    let k = parts.len() as f64;
    let avg = |f: fn(&BudgetSeries) -> &Vec<f64>| -> Vec<f64> {
        let mut out = f(&parts[0]).clone();
        for p in &parts[1..] {
            for (o, v) in out.iter_mut().zip(f(p)) {
                *o += v;
            }
        }
        out.iter().map(|v| v / k).collect()
    };
    BudgetSeries {
        times: parts[0].times.clone(),
        kinetic_energy: avg(|b| &b.kinetic_energy),
        viscous_dissipation: avg(|b| &b.viscous_dissipation),
        injection: avg(|b| &b.injection),
        cumulative_dissipation: avg(|b| &b.cumulative_dissipation),
        cumulative_injection: avg(|b| &b.cumulative_injection),
    }
}

fn mean_table(parts: &[&StructureFunctionTable]) -> StructureFunctionTable {
    let k = parts.len() as f64;
    let mut out = parts[0].clone();
    for p in &parts[1..] {
        for (a, b) in out.values.iter_mut().zip(&p.values) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in out.per_direction.iter_mut().zip(&p.per_direction) {
            for (ra, rb) in a.iter_mut().zip(b) {
                ra.iter_mut().zip(rb).for_each(|(x, y)| *x += y);
            }
        }
        out.moments.iter_mut().zip(&p.moments).for_each(|(x, y)| *x += y);
    }
    out.values.iter_mut().flatten().for_each(|v| *v /= k);
    out.per_direction.iter_mut().flatten().flatten().for_each(|v| *v /= k);
    out.moments.iter_mut().for_each(|v| *v /= k);
    out
}

/// Viscosity sweep and Onsager report; ensemble-averaged over seeds.
pub fn sweep(cfg: &ExperimentConfig) -> Result<OnsagerReport> {
    let seeds = if cfg.sweep.seeds.is_empty() {
        vec![cfg.solver.initial.field.seed]
    } else {
        cfg.sweep.seeds.clone()
    };
    let mut orders = cfg.analysis.orders.clone();
    if !orders.iter().any(|p| *p == 3.0) {
        orders.push(3.0);
    }
    let separations = cfg.separations();
    let jobs: Vec<SolverConfig> = cfg
        .sweep
        .nus
        .iter()
        .flat_map(|&nu| {
            seeds.iter().map(move |&seed| {
                let mut s = cfg.solver.clone();
                s.nu = nu;
                s.initial.field.seed = seed;
                s
            })
        })
        .collect();
    let run = |s: &SolverConfig| {
        log::info!("sweep member ν = {:e}, seed {}", s.nu, s.initial.field.seed);
        sweep_member(s, &orders, &separations)
    };
    let members: Vec<SweepMember> = if cfg.sweep.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };

    let mut merged = vec![];
    for group in members.chunks(seeds.len()) {
        let budgets: Vec<BudgetSeries> = group.iter().map(|m| m.budget.clone()).collect();
        let tables = (0..group[0].tables.len())
            .map(|i| mean_table(&group.iter().map(|m| &m.tables[i]).collect::<Vec<_>>()))
            .collect();
        merged.push(SweepMember {
            nu: group[0].nu,
            budget: mean_budget(&budgets),
            times: group[0].times.clone(),
            tables,
        });
    }

    let mut settings = OnsagerSettings::for_grid(&cfg.solver.grid);
    settings.fit_window = cfg.fit_window();
    settings.ell0 = cfg.analysis.ell0;
    settings.epsilon = cfg.sweep.epsilon;
    settings.tolerance = cfg.sweep.tolerance;
    let report = onsager_report(&merged, &settings)?;

    let dir = &cfg.output.dir;
    for m in &merged {
        budget_csv(&m.budget).write(dir.join(format!("budget_nu_{:e}.csv", m.nu)), cfg)?;
    }
    let mut per_nu = Csv::new(&["nu", "total_dissipation", "sigma_nu", "besov_norm"]);
    for i in 0..report.nus.len() {
        per_nu.push_reals(&[
            report.nus[i],
            report.total_dissipation[i],
            report.sigma_per_nu[i],
            report.besov_trend.norms[i],
        ]);
    }
    per_nu.write(dir.join("onsager.csv"), cfg)?;
    let mut sf = Csv::new(&["nu", "t", "p", "r", "s_p"]);
    for m in &merged {
        for (t, table) in m.times.iter().zip(&m.tables) {
            for (i, p) in table.orders.iter().enumerate() {
                for (r, v) in table.separations.iter().zip(&table.values[i]) {
                    sf.push_reals(&[m.nu, *t, *p, *r, *v]);
                }
            }
        }
    }
    sf.write(dir.join("sweep_structure.csv"), cfg)?;
    output::write_json(dir.join("onsager.json"), cfg, &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthSummary {
    pub path: PathBuf,
    pub energy: f64,
    pub max_divergence: f64,
}

/// Writes the configured initial field (with its pressure) and its spectrum.
pub fn synth(cfg: &ExperimentConfig) -> Result<SynthSummary> {
    let grid = cfg.solver.grid;
    let u = cfg.solver.initial.build(&grid)?;
    let f = cfg.solver.forcing.build(&grid)?;
    let snap = solver::Snapshot::new(0.0, u, &f)?;
    let path = cfg.output.dir.join("synth.lflx");
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Error::io(&cfg.output.dir, e))?;
    save_snapshot(&path, &SnapshotFile::from_snapshot(cfg.solver.nu, &snap))?;
    let mut csv = Csv::new(&["k", "energy"]);
    for (k, e) in synthetic::shell_spectrum(&snap.u).iter().enumerate() {
        csv.push(vec![k.to_string(), output::real(*e)]);
    }
    csv.write(cfg.output.dir.join("spectrum.csv"), cfg)?;
    let summary = SynthSummary {
        path,
        energy: snap.u.energy(),
        max_divergence: snap.u.max_divergence_mode()?,
    };
    output::write_json(cfg.output.dir.join("synth.json"), cfg, &summary)?;
    Ok(summary)
}
