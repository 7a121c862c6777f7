use lflx::grid::Grid;
use lflx::solver::{self, ForcingSpec, InitialSpec, Solver, SolverConfig};
use lflx::synthetic::{self, SyntheticKind, SyntheticSpec};
use lflx::SpectralField;

#[test]
fn taylor_green_decays_at_the_viscous_rate() {
    let g = Grid::new(2, 32).unwrap();
    let (nu, t_end) = (0.1, 1.0);
    let mut cfg = SolverConfig::new(g, nu, 1e-2, t_end);
    cfg.snapshot_stride = 100;
    let out = solver::run(&cfg).unwrap();
    let last = out.trajectory.snapshots.last().unwrap();
    let exact = synthetic::taylor_green(&g).scale((-2.0 * nu * t_end).exp());
    assert!(last.u.max_coeff_diff(&exact).unwrap() < 1e-12);
    assert!(out.budget.relative_balance_residual() < 1e-8);
}

fn perturbed_tg(grid: Grid) -> SpectralField {
    InitialSpec::from(SyntheticSpec::of_kind(SyntheticKind::TaylorGreen))
        .with_perturbation(SyntheticSpec::random_besov(0.5, 3).with_amplitude(1.0))
        .build(&grid)
        .unwrap()
}

fn integrate(grid: Grid, u0: &SpectralField, dt: f64, t_end: f64) -> SpectralField {
    let solver = Solver::new(grid, 0.05, dt, SpectralField::zeros(grid, 2)).unwrap();
    let steps = (t_end / dt).round() as usize;
    let mut u = u0.clone();
    for i in 0..steps {
        u = solver.step(&u, i as f64 * dt).unwrap();
    }
    u
}

#[test]
fn time_stepping_is_fourth_order() {
    let g = Grid::new(2, 32).unwrap();
    let u0 = perturbed_tg(g);
    let t = 0.4;
    let reference = integrate(g, &u0, 0.04 / 16.0, t);
    let errs: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt| integrate(g, &u0, dt, t).max_coeff_diff(&reference).unwrap())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((12.0..=20.0).contains(&ratio), "errors {errs:?}");
    }
}

#[test]
fn forced_run_balances_energy() {
    let g = Grid::new(2, 32).unwrap();
    let mut cfg = SolverConfig::new(g, 0.05, 1e-2, 2.0);
    cfg.forcing = ForcingSpec::fixed_low_mode(0.1, 1);
    cfg.initial = SyntheticSpec::random_besov(0.5, 2).into();
    cfg.snapshot_stride = 50;
    let out = solver::run(&cfg).unwrap();
    assert!(out.budget.cumulative_injection.last().unwrap().abs() > 0.0);
    assert!(out.budget.relative_balance_residual() < 1e-6);
}

#[test]
fn three_dimensional_run_stays_solenoidal() {
    let g = Grid::new(3, 16).unwrap();
    let mut cfg = SolverConfig::new(g, 0.05, 5e-3, 0.25);
    cfg.snapshot_stride = 10;
    let out = solver::run(&cfg).unwrap();
    let e: Vec<f64> = out.budget.kinetic_energy.clone();
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    for s in &out.trajectory.snapshots {
        assert!(s.u.max_divergence_mode().unwrap() < 1e-12);
    }
    assert!(out.budget.relative_balance_residual() < 1e-6);
}

#[test]
fn oversized_step_is_rejected() {
    let g = Grid::new(2, 32).unwrap();
    let cfg = SolverConfig::new(g, 0.01, 0.5, 1.0);
    assert!(matches!(solver::run(&cfg), Err(lflx::Error::CflViolation { .. })));
}

#[test]
fn stride_must_divide_step_count() {
    let g = Grid::new(2, 16).unwrap();
    let mut cfg = SolverConfig::new(g, 0.1, 1e-2, 1.0);
    cfg.snapshot_stride = 7;
    assert!(matches!(cfg.validate(), Err(lflx::Error::Config(_))));
}
