//! Argument parsing and dispatch for the `lflx` binary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Result;

use super::{check, ExperimentConfig, Overrides};

#[derive(Debug, Parser)]
#[command(name = "lflx", version, about = "Navier-Stokes runs and coarse-grained energy budgets")]
pub struct Cli {
    /// TOML configuration; defaults to the bundled Taylor-Green run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated viscosities.
    #[arg(long, global = true, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    /// Comma-separated filter scales.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ell: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the solver, writing snapshots and the energy budget.
    Simulate,
    /// Evaluate the coarse-grained balances on stored snapshots.
    Budget,
    /// Structure functions and Besov estimates.
    Structure,
    /// Flux, cumulant and resolved-dissipation scaling on synthetic ensembles.
    FluxScaling,
    /// Viscosity sweep and consistency report.
    Sweep,
    /// Write the configured initial field.
    Synth,
    /// Exact-solution regression suite.
    Check,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::taylor_green(),
    };
    Overrides {
        out: cli.out.clone(),
        nu: cli.nu.clone(),
        ell: cli.ell.clone(),
        seed: cli.seed,
    }
    .apply(&mut cfg)?;
    Ok(cfg)
}

fn say(quiet: bool, text: String) {
    if !quiet {
        println!("{text}");
    }
}

/// Executes a parsed command line; returns the process exit status.
pub fn execute(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let q = cli.quiet;
    if cli.command == Command::Check {
        let results = check::run_checks();
        let mut failed = 0;
        for r in &results {
            if !r.passed {
                failed += 1;
            }
            if !q || !r.passed {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
        }
        say(q, format!("{} of {} checks passed", results.len() - failed, results.len()));
        return Ok(if failed == 0 { 0 } else { 1 });
    }
    let cfg = load_config(cli)?;
    let dir = cfg.output.dir.display().to_string();
    match cli.command {
        Command::Simulate => {
            let s = super::simulate(&cfg)?;
            say(
                q,
                format!(
                    "{} steps, {} snapshots in {dir}; relative energy balance residual {:.3e}",
                    s.steps,
                    s.snapshots.len(),
                    s.relative_energy_balance_residual
                ),
            );
        }
        Command::Budget => {
            let s = super::budget(&cfg)?;
            for b in &s.identities {
                say(q, format!("ℓ = {}: closure residual {:.3e}", b.ell, b.relative_residual()));
            }
        }
        Command::Structure => {
            let s = super::structure(&cfg)?;
            say(q, format!("{} structure tables written to {dir}", s.tables.len()));
        }
        Command::FluxScaling => {
            let s = super::flux_scaling(&cfg)?;
            for e in &s.entries {
                let f = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3}"));
                say(
                    q,
                    format!(
                        "σ = {:.4}: flux {} (3σ-1 = {:.3}), cumulant {} (2σ = {:.3}), resolved dissipation {} (2(σ-1) = {:.3})",
                        e.sigma,
                        f(e.flux_slope),
                        e.flux_target,
                        f(e.cumulant_slope),
                        e.cumulant_target,
                        f(e.dissipation_slope),
                        e.dissipation_target
                    ),
                );
            }
        }
        Command::Sweep => {
            let r = super::sweep(&cfg)?;
            say(
                q,
                format!(
                    "α̂ = {:.4}, σ̂ = {:.4}, margin {:.4} ({})",
                    r.alpha_hat,
                    r.sigma_hat,
                    r.consistency_margin,
                    if r.consistent { "consistent" } else { "inconsistent" }
                ),
            );
        }
        Command::Synth => {
            let s = super::synth(&cfg)?;
            say(q, format!("wrote {} (energy {:.6e})", s.path.display(), s.energy));
        }
        Command::Check => unreachable!("handled above"),
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs it. Usage errors
/// exit with status 2.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => {
            init_logging(cli.quiet);
            crate::init_thread_pool();
            execute(&cli)
        }
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet { "error" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}
