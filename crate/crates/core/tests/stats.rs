use lflx::field::RealSamples;
use lflx::grid::Grid;
use lflx::stats::{
    alpha_of_sigma, besov_estimate, c0_ratio, dissipation_length, scaling_fit, sigma_of_alpha,
    structure_function_along, RatioTrend,
};

fn sin_x(n: usize) -> RealSamples {
    let g = Grid::new(2, n).unwrap();
    RealSamples::from_fn(g, 2, |x, c| if c == 0 { x[0].sin() } else { 0.0 })
}

#[test]
fn second_order_structure_function_of_a_mode() {
    let u = sin_x(64);
    let dx = u.grid().spacing();
    let seps: Vec<f64> = (1..32).map(|m| m as f64 * dx).collect();
    let t = structure_function_along(&u, &[2.0], &seps, &[[1, 0, 0]]).unwrap();
    for (r, s) in seps.iter().zip(&t.values[0]) {
        let exact = 2.0 * (r / 2.0).sin().powi(2);
        assert!((s - exact).abs() < 1e-13, "r={r}");
    }
}

#[test]
fn reversed_direction_gives_the_same_table() {
    let g = Grid::new(2, 32).unwrap();
    let u = lflx::synthetic::random_vector_field(&g, 6).to_real();
    let seps: Vec<f64> = (1..8).map(|m| m as f64 * g.spacing()).collect();
    let a = structure_function_along(&u, &[2.0, 3.0], &seps, &[[1, 1, 0]]).unwrap();
    let b = structure_function_along(&u, &[2.0, 3.0], &seps, &[[-1, -1, 0]]).unwrap();
    for (x, y) in a.values.iter().flatten().zip(b.values.iter().flatten()) {
        assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
    }
}

#[test]
fn off_lattice_separation_is_a_domain_error() {
    let u = sin_x(16);
    let r = 0.5 * u.grid().spacing();
    assert!(matches!(
        structure_function_along(&u, &[2.0], &[r], &[[1, 0, 0]]),
        Err(lflx::Error::Domain(_))
    ));
}

#[test]
fn besov_estimate_of_a_mode() {
    let u = sin_x(64);
    let dx = u.grid().spacing();
    let seps: Vec<f64> = (1..=32).map(|m| m as f64 * dx).collect();
    let t = structure_function_along(&u, &[2.0], &seps, &[[1, 0, 0]]).unwrap();
    let b = besov_estimate(&t, 2.0, 1.0, std::f64::consts::PI).unwrap();
    assert!((b.c0 - 0.5).abs() < 1e-12);
    // 2 sin²(r/2) (π/r)² is maximal as r → 0 with limit π²/2
    assert!(b.c1 <= std::f64::consts::PI.powi(2) / 2.0 + 1e-12);
    assert!(b.c1 > 4.8);
}

#[test]
fn ratio_trend_separates_smooth_and_rough_exponents() {
    let u = sin_x(128);
    let dx = u.grid().spacing();
    let seps: Vec<f64> = (0..5).map(|i| (1 << i) as f64 * dx).collect();
    let t = structure_function_along(&u, &[2.0], &seps, &[[1, 0, 0]]).unwrap();
    assert_eq!(c0_ratio(&t, 2.0, 1.0).unwrap().trend, RatioTrend::Flat);
    assert_eq!(c0_ratio(&t, 2.0, 0.5).unwrap().trend, RatioTrend::Vanishing);
}

#[test]
fn exponent_maps_are_inverse() {
    for a in [0.0, 0.25, 0.5, 0.9] {
        let s = sigma_of_alpha(a).unwrap();
        assert!((alpha_of_sigma(s).unwrap() - a).abs() < 1e-14);
    }
    assert!((sigma_of_alpha(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!(sigma_of_alpha(1.0).is_err());
    let l1 = dissipation_length(1e-3, 1.0 / 3.0).unwrap();
    let l2 = dissipation_length(1e-4, 1.0 / 3.0).unwrap();
    assert!(l2 < l1);
}

#[test]
fn scaling_fit_recovers_a_power_law() {
    let xs: Vec<f64> = (0..6).map(|i| 0.1 * 2f64.powi(i)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
    let f = scaling_fit(&xs, &ys).unwrap();
    assert!((f.slope - 1.7).abs() < 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(f.r_squared > 1.0 - 1e-12);
}
