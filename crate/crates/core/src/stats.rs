//! Structure functions, Besov estimates, the exponent calculus relating
//! dissipation decay to regularity, log-log scaling fits, and the reports
//! built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::{CoarseGrained, Mollifier};
use crate::error::{Error, Result};
use crate::field::{RealSamples, SpectralField};
use crate::grid::{Grid, BOX_LENGTH};
use crate::quadrature::simpson;
use crate::solver::BudgetSeries;

/// Lattice direction of an increment, in grid steps per unit separation.
pub type Direction = [i64; 3];

/// Axis directions plus the diagonals of every coordinate plane.
pub fn default_directions(dim: usize) -> Vec<Direction> {
    let mut dirs = vec![];
    for a in 0..dim {
        let mut d = [0; 3];
        d[a] = 1;
        dirs.push(d);
    }
    for a in 0..dim {
        for b in a + 1..dim {
            for s in [1, -1] {
                let mut d = [0; 3];
                d[a] = 1;
                d[b] = s;
                dirs.push(d);
            }
        }
    }
    dirs
}

/// `S_p(r) = ⟨|u(x + r e) - u(x)|^p⟩` over lattice points and directions.
///
/// A separation `r = mΔx` shifts by `m` lattice steps along each direction,
/// so diagonal increments span `√2 r`; `r` labels the step count. Power-law
/// slopes are unaffected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionTable {
    pub orders: Vec<f64>,
    pub separations: Vec<f64>,
    pub steps: Vec<usize>,
    pub directions: Vec<Direction>,
    /// `values[p][r]`, direction-averaged.
    pub values: Vec<Vec<f64>>,
    /// `per_direction[p][r][d]`
    pub per_direction: Vec<Vec<Vec<f64>>>,
    /// `⟨|u|^p⟩` per order.
    pub moments: Vec<f64>,
}

impl StructureFunctionTable {
    pub fn order_index(&self, p: f64) -> Result<usize> {
        self.orders
            .iter()
            .position(|&q| (q - p).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidArgument(format!("order {p} not tabulated")))
    }

    pub fn series(&self, p: f64) -> Result<&[f64]> {
        Ok(&self.values[self.order_index(p)?])
    }

    /// Log-log slope of `S_p` over separations in `[r_min, r_max]`.
    pub fn exponent(&self, p: f64, r_min: f64, r_max: f64) -> Result<ScalingFit> {
        let s = self.series(p)?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .separations
            .iter()
            .zip(s)
            .filter(|(r, _)| **r >= r_min * (1.0 - 1e-12) && **r <= r_max * (1.0 + 1e-12))
            .map(|(r, v)| (*r, *v))
            .unzip();
        scaling_fit(&xs, &ys)
    }
}

/// Separations `Δx·2^j` from `r_min` up to `r_max`.
pub fn dyadic_separations(grid: &Grid, r_min: f64, r_max: f64) -> Vec<f64> {
    let dx = grid.spacing();
    let mut m = ((r_min / dx).round() as usize).max(1);
    let mut out = vec![];
    while m as f64 * dx <= r_max * (1.0 + 1e-12) && m <= grid.n() / 2 {
        out.push(m as f64 * dx);
        m *= 2;
    }
    out
}

fn lattice_steps(grid: &Grid, separations: &[f64]) -> Result<Vec<usize>> {
    let dx = grid.spacing();
    separations
        .iter()
        .map(|&r| {
            let m = (r / dx).round();
            if !(r > 0.0) || (m * dx - r).abs() > 1e-9 * dx {
                Err(Error::Domain(format!(
                    "separation {r} is not a positive multiple of Δx = {dx}"
                )))
            } else {
                Ok(m as usize)
            }
        })
        .collect()
}

/// Structure functions of `u` along [`default_directions`].
pub fn structure_function(
    u: &SpectralField,
    orders: &[f64],
    separations: &[f64],
) -> Result<StructureFunctionTable> {
    let dirs = default_directions(u.grid().dim());
    structure_function_along(&u.to_real(), orders, separations, &dirs)
}

/// Structure functions of sampled `u` along an explicit direction set.
pub fn structure_function_along(
    u: &RealSamples,
    orders: &[f64],
    separations: &[f64],
    directions: &[Direction],
) -> Result<StructureFunctionTable> {
    let grid = *u.grid();
    if orders.is_empty() || orders.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Domain(format!("orders {orders:?} must be positive")));
    }
    if directions.is_empty() {
        return Err(Error::InvalidArgument("empty direction set".into()));
    }
    let steps = lattice_steps(&grid, separations)?;
    let comps = u.components();
    let len = grid.len();
    let n = grid.n() as i64;
    let dim = grid.dim();

    let moments = orders
        .iter()
        .map(|&p| u.magnitude().iter().map(|m| m.powf(p)).sum::<f64>() / len as f64)
        .collect();

    // per (separation, direction): the p-th increment moments
    let cells: Vec<(usize, usize)> = (0..steps.len())
        .flat_map(|r| (0..directions.len()).map(move |d| (r, d)))
        .collect();
    let sums: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(r, d)| {
            let shift: Vec<i64> = (0..3).map(|a| directions[d][a] * steps[r] as i64).collect();
            let mut acc = vec![0.0; orders.len()];
            for idx in 0..len {
                let ix = grid.unravel(idx);
                let mut jx = [0usize; 3];
                for a in 0..dim {
                    jx[a] = (ix[a] as i64 + shift[a]).rem_euclid(n) as usize;
                }
                let j = grid.ravel(jx);
                let mut s2 = 0.0;
                for c in 0..comps {
                    let v = u.component(c);
                    let dv = v[j] - v[idx];
                    s2 += dv * dv;
                }
                for (a, &p) in acc.iter_mut().zip(orders) {
                    *a += if p == 2.0 { s2 } else { s2.sqrt().powf(p) };
                }
            }
            acc.into_iter().map(|a| a / len as f64).collect()
        })
        .collect();

    let mut per_direction = vec![vec![vec![0.0; directions.len()]; steps.len()]; orders.len()];
    for (c, &(r, d)) in cells.iter().enumerate() {
        for p in 0..orders.len() {
            per_direction[p][r][d] = sums[c][p];
        }
    }
    let values = per_direction
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|ds| ds.iter().sum::<f64>() / ds.len() as f64)
                .collect()
        })
        .collect();
    Ok(StructureFunctionTable {
        orders: orders.to_vec(),
        separations: separations.to_vec(),
        steps,
        directions: directions.to_vec(),
        values,
        per_direction,
        moments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovEstimate {
    pub p: f64,
    pub sigma: f64,
    pub ell0: f64,
    /// `⟨|u|^p⟩`
    pub c0: f64,
    /// `max_{r ≤ ℓ₀} S_p(r) (r/ℓ₀)^{-σp}`
    pub c1: f64,
    /// Separation attaining `c1` (0 if none qualifies).
    pub argmax_r: f64,
    /// `(C0 + C1)^{1/p}`
    pub norm: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("σ = {sigma} not in (0, 1]")))
    }
}

pub fn besov_estimate(
    table: &StructureFunctionTable,
    p: f64,
    sigma: f64,
    ell0: f64,
) -> Result<BesovEstimate> {
    check_sigma(sigma)?;
    if !(ell0 > 0.0) {
        return Err(Error::Domain(format!("ℓ₀ = {ell0} must be positive")));
    }
    let i = table.order_index(p)?;
    let c0 = table.moments[i];
    let (mut c1, mut argmax_r) = (0.0, 0.0);
    for (r, s) in table.separations.iter().zip(&table.values[i]) {
        if *r > ell0 * (1.0 + 1e-12) {
            continue;
        }
        let v = s * (r / ell0).powf(-sigma * p);
        if v > c1 || argmax_r == 0.0 {
            c1 = v;
            argmax_r = *r;
        }
    }
    Ok(BesovEstimate {
        p,
        sigma,
        ell0,
        c0,
        c1,
        argmax_r,
        norm: (c0 + c1).powf(1.0 / p),
    })
}

/// Small-separation behaviour of `S_p^{1/p}/r^σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioTrend {
    /// Decreasing toward small `r`: the vanishing-ratio subspace signature.
    Vanishing,
    Flat,
    Growing,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Ratio {
    pub separations: Vec<f64>,
    pub ratio: Vec<f64>,
    /// Log-log slope of the ratio over the smaller half of the table.
    pub small_r_slope: Option<f64>,
    pub trend: RatioTrend,
}

/// Slope magnitude below which the ratio counts as flat.
pub const FLAT_RATIO_SLOPE: f64 = 0.1;

pub fn c0_ratio(table: &StructureFunctionTable, p: f64, sigma: f64) -> Result<C0Ratio> {
    check_sigma(sigma)?;
    let s = table.series(p)?;
    let ratio: Vec<f64> = table
        .separations
        .iter()
        .zip(s)
        .map(|(r, v)| v.powf(1.0 / p) / r.powf(sigma))
        .collect();
    let mut order: Vec<usize> = (0..ratio.len()).collect();
    order.sort_by(|&a, &b| table.separations[a].total_cmp(&table.separations[b]));
    let take = (order.len().div_ceil(2)).max(3).min(order.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = order[..take]
        .iter()
        .map(|&i| (table.separations[i], ratio[i]))
        .unzip();
    let (small_r_slope, trend) = if ys.iter().any(|v| !(*v > 0.0)) {
        (None, RatioTrend::Degenerate)
    } else {
        match scaling_fit(&xs, &ys) {
            Ok(fit) => {
                let t = if fit.slope > FLAT_RATIO_SLOPE {
                    RatioTrend::Vanishing
                } else if fit.slope < -FLAT_RATIO_SLOPE {
                    RatioTrend::Growing
                } else {
                    RatioTrend::Flat
                };
                (Some(fit.slope), t)
            }
            Err(_) => (None, RatioTrend::Degenerate),
        }
    };
    Ok(C0Ratio {
        separations: table.separations.clone(),
        ratio,
        small_r_slope,
        trend,
    })
}

/// `σ_α = (1+α)/(3-α)` for `α ∈ [0, 1)`.
pub fn sigma_of_alpha(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("α = {alpha} not in [0, 1)")));
    }
    Ok((1.0 + alpha) / (3.0 - alpha))
}

/// `α_σ = (3σ-1)/(σ+1)` for `σ ∈ (0, 1]`.
pub fn alpha_of_sigma(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok((3.0 * sigma - 1.0) / (sigma + 1.0))
}

/// Scale `ν^{1/(σ+1)}` where flux and viscous terms balance (unit prefactor).
pub fn dissipation_length(nu: f64, sigma: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("ν = {nu} must be positive")));
    }
    check_sigma(sigma)?;
    Ok(nu.powf(1.0 / (sigma + 1.0)))
}

/// Flux model term `ℓ^{3σ-1}`.
pub fn model_flux(ell: f64, sigma: f64) -> f64 {
    ell.powf(3.0 * sigma - 1.0)
}

/// Resolved dissipation model term `ν ℓ^{2(σ-1)}`.
pub fn model_resolved_dissipation(nu: f64, ell: f64, sigma: f64) -> f64 {
    nu * ell.powf(2.0 * (sigma - 1.0))
}

/// Least-squares fit of `log y = slope·log x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub log_x: Vec<f64>,
    pub log_y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slopes over consecutive triples (sorted by x).
    pub local_slopes: Vec<f64>,
    pub x_range: (f64, f64),
    /// Local slopes move monotonically by more than [`DRIFT_THRESHOLD`]:
    /// the signature of a slowly varying correction to a power law.
    pub drift: bool,
}

pub const DRIFT_THRESHOLD: f64 = 0.02;

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

pub fn scaling_fit(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain("scaling fit needs positive finite data".into()));
    }
    let mut pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    if lx[lx.len() - 1] - lx[0] <= 0.0 {
        return Err(Error::Domain("scaling fit needs distinct x values".into()));
    }
    let (slope, intercept, r_squared) = least_squares(&lx, &ly);
    let local_slopes: Vec<f64> = (0..lx.len() - 2)
        .map(|i| least_squares(&lx[i..i + 3], &ly[i..i + 3]).0)
        .collect();
    let drift = if local_slopes.len() >= 2 {
        let inc = local_slopes.windows(2).all(|w| w[1] > w[0]);
        let dec = local_slopes.windows(2).all(|w| w[1] < w[0]);
        let spread = (local_slopes[local_slopes.len() - 1] - local_slopes[0]).abs();
        (inc || dec) && spread > DRIFT_THRESHOLD
    } else {
        false
    };
    Ok(ScalingFit {
        x_range: (lx[0].exp(), lx[lx.len() - 1].exp()),
        log_x: lx,
        log_y: ly,
        slope,
        intercept,
        r_squared,
        local_slopes,
        drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// Some norm vanished, so no log-log fit exists.
    Degenerate,
}

/// Norms of the coarse-grained budget terms of one field across scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxScalingRow {
    /// `‖Π_ℓ‖₁`
    pub flux_l1: Vec<f64>,
    /// `‖tr τ_ℓ(u,u)‖₁`
    pub cumulant_l1: Vec<f64>,
    /// `ν‖∇ū_ℓ‖₂²`
    pub resolved_dissipation: Vec<f64>,
    pub flux_fit: Option<ScalingFit>,
    pub cumulant_fit: Option<ScalingFit>,
    pub dissipation_fit: Option<ScalingFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxScalingReport {
    pub ells: Vec<f64>,
    pub nu: f64,
    pub status: FitStatus,
    pub rows: Vec<FluxScalingRow>,
    /// Ensemble means of the per-field slopes.
    pub flux_slope: Option<f64>,
    pub cumulant_slope: Option<f64>,
    pub dissipation_slope: Option<f64>,
}

/// Checks `ells` is dyadic and inside `[4·2π/n, π/2]`.
pub fn check_scale_list(grid: &Grid, ells: &[f64]) -> Result<()> {
    let lo = 4.0 * BOX_LENGTH / grid.n() as f64;
    let hi = BOX_LENGTH / 4.0;
    if ells.is_empty() {
        return Err(Error::Domain("empty ℓ list".into()));
    }
    for &l in ells {
        if !(l >= lo * (1.0 - 1e-12) && l <= hi * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("ℓ = {l} outside resolvable range [{lo}, {hi}]")));
        }
    }
    let mut sorted = ells.to_vec();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        if ((w[1] / w[0]) - 2.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("ℓ list {ells:?} is not dyadic")));
        }
    }
    Ok(())
}

fn l1(grid: &Grid, v: &[f64]) -> f64 {
    RealSamples::integrate(grid, &v.iter().map(|x| x.abs()).collect::<Vec<_>>())
}

/// Fits `‖Π_ℓ‖₁`, `‖tr τ_ℓ‖₁` and `ν‖∇ū_ℓ‖₂²` against `ℓ` for each field.
pub fn flux_scaling_report(
    fields: &[SpectralField],
    ells: &[f64],
    nu: f64,
    m: &Mollifier,
) -> Result<FluxScalingReport> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("no fields".into()))?;
    let grid = *first.grid();
    if fields.iter().any(|f| f.grid() != &grid) {
        return Err(Error::GridMismatch);
    }
    check_scale_list(&grid, ells)?;
    let mut rows = vec![];
    for u in fields {
        let mut row = FluxScalingRow {
            flux_l1: vec![],
            cumulant_l1: vec![],
            resolved_dissipation: vec![],
            flux_fit: None,
            cumulant_fit: None,
            dissipation_fit: None,
        };
        for &ell in ells {
            let cg = CoarseGrained::new(u, ell, m)?;
            let lattice = *cg.lattice();
            row.flux_l1.push(l1(&lattice, &cg.flux()));
            row.cumulant_l1.push(l1(&lattice, &cg.cumulant.trace()));
            row.resolved_dissipation
                .push(nu * cg.filtered.gradient_norm_squared());
        }
        rows.push(row);
    }
    let degenerate = rows.iter().any(|r| {
        r.flux_l1
            .iter()
            .chain(&r.cumulant_l1)
            .chain(&r.resolved_dissipation)
            .any(|v| !(*v > 0.0))
    });
    let mut report = FluxScalingReport {
        ells: ells.to_vec(),
        nu,
        status: if degenerate {
            FitStatus::Degenerate
        } else {
            FitStatus::Ok
        },
        rows,
        flux_slope: None,
        cumulant_slope: None,
        dissipation_slope: None,
    };
    if degenerate || ells.len() < 3 {
        if !degenerate {
            report.status = FitStatus::Degenerate;
        }
        return Ok(report);
    }
    for row in &mut report.rows {
        row.flux_fit = Some(scaling_fit(ells, &row.flux_l1)?);
        row.cumulant_fit = Some(scaling_fit(ells, &row.cumulant_l1)?);
        row.dissipation_fit = Some(scaling_fit(ells, &row.resolved_dissipation)?);
    }
    let mean = |f: fn(&FluxScalingRow) -> f64, rows: &[FluxScalingRow]| {
        Some(rows.iter().map(f).sum::<f64>() / rows.len() as f64)
    };
    report.flux_slope = mean(|r| r.flux_fit.as_ref().map_or(0.0, |f| f.slope), &report.rows);
    report.cumulant_slope = mean(|r| r.cumulant_fit.as_ref().map_or(0.0, |f| f.slope), &report.rows);
    report.dissipation_slope =
        mean(|r| r.dissipation_fit.as_ref().map_or(0.0, |f| f.slope), &report.rows);
    Ok(report)
}

/// What one viscosity of a sweep contributes to the Onsager report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMember {
    pub nu: f64,
    pub budget: BudgetSeries,
    /// Snapshot times of `tables`, uniformly spaced.
    pub times: Vec<f64>,
    /// Structure-function tables (orders including 3) per snapshot.
    pub tables: Vec<StructureFunctionTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsagerSettings {
    /// Inertial window for the `ζ_3` fit.
    pub fit_window: (f64, f64),
    pub ell0: f64,
    /// Regularity offset `ε` above `σ_α̂` for the Besov trend.
    pub epsilon: f64,
    /// Allowed shortfall in `α̂ ≥ α(σ̂)`.
    pub tolerance: f64,
}

impl OnsagerSettings {
    /// Window `[4Δx, ℓ₀/4]` with `ℓ₀ = 2π`.
    pub fn for_grid(grid: &Grid) -> Self {
        OnsagerSettings {
            fit_window: (4.0 * grid.spacing(), BOX_LENGTH / 4.0),
            ell0: BOX_LENGTH,
            epsilon: 0.05,
            tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovTrend {
    pub sigma: f64,
    /// `(∫ ‖u(t)‖³_{B₃^{σ,∞}} dt)^{1/3}` per viscosity.
    pub norms: Vec<f64>,
    /// Log-log slope of the norm against `ν` (negative: grows as `ν → 0`).
    pub slope: Option<f64>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsagerReport {
    pub nus: Vec<f64>,
    pub total_dissipation: Vec<f64>,
    pub alpha_hat: f64,
    pub alpha_fit: ScalingFit,
    /// Time-averaged `ζ_3/3` per viscosity, clamped to `(0, 1]`.
    pub sigma_per_nu: Vec<f64>,
    pub sigma_hat: f64,
    /// `α̂ - (3σ̂-1)/(σ̂+1)`
    pub consistency_margin: f64,
    pub tolerance: f64,
    pub consistent: bool,
    pub besov_trend: BesovTrend,
    pub settings: OnsagerSettings,
    pub note: String,
}

const SIGMA_FLOOR: f64 = 1e-6;

/// Dissipation-decay exponent, regularity estimate and their consistency
/// across a viscosity sweep. Verdicts describe finite-`ν` data only.
pub fn onsager_report(sweep: &[SweepMember], settings: &OnsagerSettings) -> Result<OnsagerReport> {
    if sweep.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "onsager report needs at least 4 viscosities, got {}",
            sweep.len()
        )));
    }
    let nus: Vec<f64> = sweep.iter().map(|s| s.nu).collect();
    let inc = nus.windows(2).all(|w| w[1] > w[0]);
    let dec = nus.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::InvalidArgument(format!("viscosities {nus:?} are not monotone")));
    }
    let total_dissipation: Vec<f64> = sweep.iter().map(|s| s.budget.total_dissipation()).collect();
    let alpha_fit = scaling_fit(&nus, &total_dissipation)?;
    let alpha_hat = alpha_fit.slope;

    let (r0, r1) = settings.fit_window;
    let mut sigma_per_nu = vec![];
    for member in sweep {
        if member.tables.is_empty() || member.tables.len() != member.times.len() {
            return Err(Error::InvalidArgument(format!(
                "ν = {}: {} tables for {} times",
                member.nu,
                member.tables.len(),
                member.times.len()
            )));
        }
        let zetas = member
            .tables
            .iter()
            .map(|t| t.exponent(3.0, r0, r1).map(|f| f.slope))
            .collect::<Result<Vec<_>>>()?;
        let zeta = time_average(&member.times, &zetas);
        sigma_per_nu.push((zeta / 3.0).clamp(SIGMA_FLOOR, 1.0));
    }
    let sigma_hat = sigma_per_nu.iter().copied().fold(f64::INFINITY, f64::min);
    let consistency_margin = alpha_hat - alpha_of_sigma(sigma_hat)?;

    let sigma_b = (sigma_of_alpha(alpha_hat.clamp(0.0, 1.0 - 1e-12))? + settings.epsilon).min(1.0);
    let norms = sweep
        .iter()
        .map(|member| {
            let cubes = member
                .tables
                .iter()
                .map(|t| besov_estimate(t, 3.0, sigma_b, settings.ell0).map(|b| b.c0 + b.c1))
                .collect::<Result<Vec<_>>>()?;
            let span = member.times[member.times.len() - 1] - member.times[0];
            let integral = if member.times.len() > 1 {
                simpson(&cubes, span / (member.times.len() - 1) as f64)
            } else {
                cubes[0]
            };
            Ok(integral.cbrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let slope = scaling_fit(&nus, &norms).ok().map(|f| f.slope);
    let verdict = match slope {
        Some(s) if s < -0.05 => "norm grows as ν decreases",
        Some(s) if s > 0.05 => "norm decreases as ν decreases",
        Some(_) => "norm roughly constant across ν",
        None => "degenerate",
    }
    .to_string();

    Ok(OnsagerReport {
        nus,
        total_dissipation,
        alpha_hat,
        alpha_fit,
        sigma_per_nu,
        sigma_hat,
        consistency_margin,
        tolerance: settings.tolerance,
        consistent: consistency_margin >= -settings.tolerance,
        besov_trend: BesovTrend {
            sigma: sigma_b,
            norms,
            slope,
            verdict,
        },
        settings: settings.clone(),
        note: "finite-viscosity estimates; the ν → 0 regime is not reached, so no asymptotic \
               statement is implied"
            .into(),
    })
}

/// Mean over uniformly spaced `times` by Simpson's rule (plain mean if one sample).
fn time_average(times: &[f64], values: &[f64]) -> f64 {
    if values.len() < 2 {
        return values.iter().sum::<f64>() / values.len().max(1) as f64;
    }
    let span = times[times.len() - 1] - times[0];
    simpson(values, span / (values.len() - 1) as f64) / span
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_endpoints() {
        assert_eq!(sigma_of_alpha(0.0).unwrap(), 1.0 / 3.0);
        assert_eq!(alpha_of_sigma(1.0).unwrap(), 1.0);
        assert!(sigma_of_alpha(1.0).is_err());
        assert!(alpha_of_sigma(0.0).is_err());
        assert!((dissipation_length(1e-4, 1.0).unwrap() - 1e-2).abs() < 1e-16);
        assert!((dissipation_length(1e-4, 1.0 / 3.0).unwrap() - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_power_and_flags_drift() {
        let xs: Vec<f64> = (1..=8).map(|i| 0.5f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
        let f = scaling_fit(&xs, &ys).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!(f.local_slopes.iter().all(|s| (s - 0.5).abs() < 1e-12));
        assert!(!f.drift);
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt() * (1.0 / x).ln()).collect();
        let f = scaling_fit(&xs, &ys).unwrap();
        assert!(f.drift);
        assert!(scaling_fit(&xs[..2], &ys[..2]).is_err());
        assert!(scaling_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn scale_list_checks() {
        let g = Grid::new(2, 256).unwrap();
        let ells: Vec<f64> = [64.0, 32.0, 16.0, 8.0].iter().map(|d| BOX_LENGTH / d).collect();
        check_scale_list(&g, &ells).unwrap();
        assert!(check_scale_list(&g, &[BOX_LENGTH / 128.0]).is_err());
        assert!(check_scale_list(&g, &[0.2, 0.3]).is_err());
    }

    #[test]
    fn off_lattice_separation_rejected() {
        let g = Grid::new(2, 16).unwrap();
        let u = crate::synthetic::shear(&g);
        let err = structure_function(&u, &[2.0], &[0.3]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
