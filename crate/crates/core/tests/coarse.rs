use lflx::coarse::{self, CoarseGrained, Mollifier};
use lflx::field::RealSamples;
use lflx::grid::Grid;
use lflx::synthetic;

/// `∫ G(x) cos(ξ x₁) dx` by the midpoint rule on a 2048² lattice over `[-1,1]²`.
fn lattice_transform(m: &Mollifier, xi: f64) -> f64 {
    let n = 2048;
    let h = 2.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let x = -1.0 + (i as f64 + 0.5) * h;
        let c = (xi * x).cos();
        for j in 0..n {
            let y = -1.0 + (j as f64 + 0.5) * h;
            let r = (x * x + y * y).sqrt();
            if r < 1.0 {
                s += c * m.kernel(2, r);
            }
        }
    }
    s * h * h
}

#[test]
fn transform_matches_lattice_quadrature() {
    let m = Mollifier::bump();
    for xi in [0.0, 1.0, 3.0] {
        let a = m.transform(2, xi);
        let b = lattice_transform(&m, xi);
        assert!((a - b).abs() < 1e-6, "ξ={xi}: {a} vs {b}");
    }
    assert!((m.transform(2, 1.0) - 0.936248109724288).abs() < 1e-12);
    assert!((m.transform(2, 10.0) - 0.00765191509203222).abs() < 1e-12);
}

#[test]
fn filter_of_a_mode_is_a_scaled_mode() {
    let g = Grid::new(2, 32).unwrap();
    let m = Mollifier::bump();
    let ell = 0.4;
    let u = RealSamples::from_fn(g, 2, |x, c| if c == 0 { (3.0 * x[1]).sin() } else { 0.0 })
        .to_spectral();
    let ub = coarse::filter(&u, ell, &m).unwrap();
    let expected = u.scale(m.transform(2, 3.0 * ell));
    assert!(ub.max_coeff_diff(&expected).unwrap() < 1e-14);
}

#[test]
fn filter_agrees_with_direct_convolution() {
    let n = 32;
    let g = Grid::new(2, n).unwrap();
    let m = Mollifier::bump();
    let ell = 0.6;
    let f = RealSamples::from_fn(g, 1, |x, _| (x[0].sin() + 0.5 * (2.0 * x[1]).cos()).exp());
    let fb = coarse::filter(&f.to_spectral(), ell, &m).unwrap().to_real();
    // trigonometric interpolant evaluated on a fine quadrature of the kernel
    let spec = f.to_spectral();
    let q = 200;
    let h = 2.0 / q as f64;
    let mut acc = 0.0;
    let x0 = [1.0, 2.0];
    let idx = g.ravel([
        (x0[0] / g.spacing()).round() as usize,
        (x0[1] / g.spacing()).round() as usize,
        0,
    ]);
    let p = g.position(idx);
    for i in 0..q {
        for j in 0..q {
            let a = -1.0 + (i as f64 + 0.5) * h;
            let b = -1.0 + (j as f64 + 0.5) * h;
            let r = (a * a + b * b).sqrt();
            if r >= 1.0 {
                continue;
            }
            let y = [p[0] - ell * a, p[1] - ell * b];
            let mut v = 0.0;
            for (k, c) in spec.coeffs().iter().enumerate() {
                let kv = g.wavevector(k);
                let ph = kv[0] as f64 * y[0] + kv[1] as f64 * y[1];
                v += c.re * ph.cos() - c.im * ph.sin();
            }
            acc += m.kernel(2, r) * v;
        }
    }
    acc *= h * h;
    assert!((acc - fb.values()[idx]).abs() < 1e-3, "{acc} vs {}", fb.values()[idx]);
}

#[test]
fn shear_has_no_flux() {
    let g = Grid::new(2, 32).unwrap();
    let u = synthetic::shear(&g);
    let pi = coarse::flux(&u, 0.5, &Mollifier::bump()).unwrap();
    assert!(pi.max_abs() < 1e-14);
}

#[test]
fn taylor_green_flux_integrates_to_zero() {
    let g = Grid::new(2, 32).unwrap();
    let u = synthetic::taylor_green(&g);
    for ell in [0.2, 0.5, 1.0] {
        let pi = coarse::flux(&u, ell, &Mollifier::bump()).unwrap();
        let total = RealSamples::integrate(pi.grid(), pi.values());
        assert!(total.abs() < 1e-12, "ℓ={ell}: {total}");
    }
}

#[test]
fn filtered_field_converges_as_ell_shrinks() {
    let g = Grid::new(2, 32).unwrap();
    let u = synthetic::generate(&g, &synthetic::SyntheticSpec::random_besov(0.5, 4)).unwrap();
    let m = Mollifier::bump();
    let mut prev = f64::INFINITY;
    for ell in [0.8, 0.4, 0.2, 0.1, 0.05, 0.01] {
        let d = coarse::filter(&u, ell, &m).unwrap().axpy(-1.0, &u).unwrap().energy();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-4 * u.energy());
}

#[test]
fn cumulant_trace_is_nonnegative() {
    let g = Grid::new(2, 16).unwrap();
    let u = synthetic::random_vector_field(&g, 8);
    let tau = coarse::cumulant(&u, &u, 0.5, &Mollifier::bump()).unwrap();
    let min = tau.trace().into_iter().fold(f64::INFINITY, f64::min);
    assert!(min > -1e-12, "{min}");
}

#[test]
fn coarse_grained_gradient_matches_filtered_derivative() {
    let g = Grid::new(2, 16).unwrap();
    let u = synthetic::taylor_green(&g);
    let m = Mollifier::bump();
    let cg = CoarseGrained::new(&u, 0.3, &m).unwrap();
    let s = m.transform(2, 0.3 * 2f64.sqrt());
    // ∂_x ū_x = s · cos x cos y
    let lat = *cg.lattice();
    for idx in (0..lat.len()).step_by(37) {
        let x = lat.position(idx);
        let want = s * x[0].cos() * x[1].cos();
        assert!((cg.grad(0, 0)[idx] - want).abs() < 1e-12);
    }
}
