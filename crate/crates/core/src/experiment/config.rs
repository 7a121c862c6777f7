//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coarse::{Mollifier, Profile};
use crate::error::{Error, Result};
use crate::grid::BOX_LENGTH;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub solver: SolverConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Filter scales for the budget commands.
    pub ells: Vec<f64>,
    /// Structure-function orders.
    pub orders: Vec<f64>,
    /// Separations; empty means dyadic multiples of `Δx` up to `π`.
    pub separations: Vec<f64>,
    /// Inertial window `[r_min, r_max]`; absent means `[4Δx, ℓ₀/4]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    pub ell0: f64,
    /// Regularity used by `structure` for Besov estimates.
    pub besov_sigma: f64,
    pub mollifier: Profile,
    pub flux_scaling: FluxScalingConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            ells: vec![0.1, 0.3, 0.6],
            orders: vec![2.0, 3.0],
            separations: vec![],
            fit_window: None,
            ell0: BOX_LENGTH,
            besov_sigma: 1.0 / 3.0,
            mollifier: Profile::Bump,
            flux_scaling: FluxScalingConfig::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn mollifier(&self) -> Mollifier {
        Mollifier::new(self.mollifier)
    }
}

/// Synthetic ensembles for the flux-scaling command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluxScalingConfig {
    pub n: usize,
    pub sigmas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Dyadic scales; empty means `2π/64 … 2π/8`.
    pub ells: Vec<f64>,
    /// Viscosity multiplying the resolved dissipation.
    pub nu: f64,
}

impl Default for FluxScalingConfig {
    fn default() -> Self {
        FluxScalingConfig {
            n: 256,
            sigmas: vec![0.2, 1.0 / 3.0, 0.5],
            seeds: (1..=8).collect(),
            ells: vec![],
            nu: 1e-3,
        }
    }
}

impl FluxScalingConfig {
    pub fn scales(&self) -> Vec<f64> {
        if self.ells.is_empty() {
            [64.0, 32.0, 16.0, 8.0].iter().map(|d| BOX_LENGTH / d).collect()
        } else {
            self.ells.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub nus: Vec<f64>,
    /// Initial-condition seeds; the sweep uses their ensemble mean.
    pub seeds: Vec<u64>,
    /// Run members concurrently.
    pub parallel: bool,
    /// Regularity offset above `σ_α̂` for the Besov trend.
    pub epsilon: f64,
    /// Allowed shortfall in the consistency inequality.
    pub tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            nus: vec![1e-3, 5e-4, 2.5e-4, 1.25e-4],
            seeds: vec![],
            parallel: false,
            epsilon: 0.05,
            tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

/// The Taylor–Green decay configuration shipped with the crate.
pub const TAYLOR_GREEN_TOML: &str = include_str!("../../configs/taylor_green.toml");
/// The decaying-turbulence viscosity sweep shipped with the crate.
pub const SWEEP_TOML: &str = include_str!("../../configs/sweep.toml");

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn taylor_green() -> Self {
        Self::from_toml(TAYLOR_GREEN_TOML).expect("bundled config is valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let a = &self.analysis;
        if a.ells.iter().any(|l| !(*l > 0.0 && *l <= BOX_LENGTH)) {
            return Err(Error::Config(format!("analysis.ells {:?} must lie in (0, 2π]", a.ells)));
        }
        if a.orders.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Config(format!("analysis.orders {:?} must be positive", a.orders)));
        }
        if let Some([lo, hi]) = a.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(Error::Config(format!("analysis.fit_window [{lo}, {hi}] is empty")));
            }
        }
        if !(a.besov_sigma > 0.0 && a.besov_sigma <= 1.0) {
            return Err(Error::Config(format!("analysis.besov_sigma {} not in (0, 1]", a.besov_sigma)));
        }
        if self.sweep.nus.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config(format!("sweep.nus {:?} must be positive", self.sweep.nus)));
        }
        Ok(())
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.analysis.fit_window {
            Some([lo, hi]) => (lo, hi),
            None => (4.0 * self.solver.grid.spacing(), self.analysis.ell0 / 4.0),
        }
    }

    pub fn separations(&self) -> Vec<f64> {
        if self.analysis.separations.is_empty() {
            crate::stats::dyadic_separations(&self.solver.grid, 0.0, std::f64::consts::PI)
        } else {
            self.analysis.separations.clone()
        }
    }
}
