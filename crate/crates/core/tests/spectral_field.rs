use std::f64::consts::PI;

use lflx::field::{LpOrder, RealSamples, SpectralField};
use lflx::grid::Grid;
use lflx::synthetic;

fn random_samples(grid: Grid, components: usize, seed: u64) -> RealSamples {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let values = (0..components * grid.len())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    RealSamples::new(grid, components, values).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn sample_round_trip_is_exact_to_roundoff() {
    for (dim, n) in [(2, 16), (2, 32), (3, 8)] {
        let g = Grid::new(dim, n).unwrap();
        let s = random_samples(g, dim, 3);
        let back = s.to_spectral().to_real();
        assert!(max_diff(s.values(), back.values()) < 1e-12, "d={dim} n={n}");
    }
}

#[test]
fn derivative_matches_closed_form() {
    let g = Grid::new(2, 32).unwrap();
    let f = RealSamples::from_fn(g, 1, |x, _| (3.0 * x[0]).sin() * (2.0 * x[1]).cos()).to_spectral();
    let dx = f.derivative(0).unwrap().to_real();
    let dy = f.derivative(1).unwrap().to_real();
    let ex = RealSamples::from_fn(g, 1, |x, _| 3.0 * (3.0 * x[0]).cos() * (2.0 * x[1]).cos());
    let ey = RealSamples::from_fn(g, 1, |x, _| -2.0 * (3.0 * x[0]).sin() * (2.0 * x[1]).sin());
    assert!(max_diff(dx.values(), ex.values()) < 1e-12);
    assert!(max_diff(dy.values(), ey.values()) < 1e-12);
}

#[test]
fn derivative_agrees_with_fine_central_difference() {
    // smooth but not a trigonometric polynomial: exp(sin x) cos y
    let n = 64;
    let g = Grid::new(2, n).unwrap();
    let f = RealSamples::from_fn(g, 1, |x, _| x[0].sin().exp() * x[1].cos());
    let d = f.to_spectral().derivative(0).unwrap().to_real();
    let h = 1e-5;
    let fd = RealSamples::from_fn(g, 1, |x, _| {
        ((x[0] + h).sin().exp() - (x[0] - h).sin().exp()) / (2.0 * h) * x[1].cos()
    });
    assert!(max_diff(d.values(), fd.values()) < 1e-8);
}

#[test]
fn leray_projection_is_idempotent_and_solenoidal() {
    let g = Grid::new(3, 8).unwrap();
    let u = random_samples(g, 3, 11).to_spectral();
    let p = u.leray_project().unwrap();
    assert!(p.max_divergence_mode().unwrap() < 1e-12);
    let pp = p.leray_project().unwrap();
    assert!(p.max_coeff_diff(&pp).unwrap() < 1e-14);
}

#[test]
fn leray_projection_is_self_adjoint() {
    let g = Grid::new(2, 16).unwrap();
    let u = random_samples(g, 2, 1).to_spectral();
    let v = random_samples(g, 2, 2).to_spectral();
    let a = u.leray_project().unwrap().inner(&v).unwrap();
    let b = u.inner(&v.leray_project().unwrap()).unwrap();
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
}

#[test]
fn parseval_holds() {
    let g = Grid::new(2, 32).unwrap();
    let s = random_samples(g, 2, 5);
    let direct: f64 = s.values().iter().map(|v| v * v).sum::<f64>() * g.spacing().powi(2);
    let spectral = s.to_spectral().l2_norm_squared();
    assert!((direct - spectral).abs() < 1e-10 * direct);
}

#[test]
fn lp_norm_of_shear() {
    // |sin y|³ has a jump in its third derivative, so the lattice sum
    // converges only algebraically
    let g = Grid::new(2, 256).unwrap();
    let u = synthetic::shear(&g);
    // ∫∫ |sin y|³ = 2π · 8/3
    let l3 = u.lp_norm(3.0).unwrap();
    assert!((l3 - (16.0 * PI / 3.0).powf(1.0 / 3.0)).abs() < 1e-7);
    let l2 = u.lp_norm(2.0).unwrap();
    assert!((l2 - (2.0 * PI * PI).sqrt()).abs() < 1e-10);
    assert!((u.lp_norm(LpOrder::Infinity).unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn resampling_up_and_down_preserves_modes() {
    let g = Grid::new(2, 16).unwrap();
    let u = random_samples(g, 2, 9).to_spectral().dealias();
    let up = u.resample(g.refined()).unwrap();
    let down = up.resample(g).unwrap();
    assert!(u.max_coeff_diff(&down).unwrap() < 1e-15);
    assert!((u.energy() - up.energy()).abs() < 1e-12 * u.energy());
}

#[test]
fn grid_mismatch_is_reported() {
    let a = SpectralField::zeros(Grid::new(2, 8).unwrap(), 2);
    let b = SpectralField::zeros(Grid::new(2, 16).unwrap(), 2);
    assert!(a.inner(&b).is_err());
    assert!(Grid::new(4, 8).is_err());
}
