//! Quadrature rules: composite Gauss–Legendre in space, Simpson in time,
//! and fourth-order central differences for time derivatives.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_m`).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule: `panels` equal panels on `[a, b]`, `order` nodes each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Integral of uniformly spaced samples. Composite Simpson; for an even
/// number of samples the last three intervals use the 3/8 rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len();
    match m {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ if m % 2 == 1 => simpson_odd(values, h),
        _ => {
            // m even: Simpson on the first m-3 samples, 3/8 on the last four
            let head = simpson_odd(&values[..m - 3], h);
            let t = &values[m - 4..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

fn simpson_odd(values: &[f64], h: f64) -> f64 {
    let m = values.len();
    if m == 1 {
        return 0.0;
    }
    let mut s = values[0] + values[m - 1];
    for (i, v) in values.iter().enumerate().take(m - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Running integrals `∫_0^{t_i}` of uniformly spaced samples, fourth order:
/// even indices by composite Simpson, odd indices by adding the
/// single-interval quadratic rule `(5 f0 + 8 f1 - f2) h / 12`.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    let mut out = vec![0.0; m];
    if m < 2 {
        return out;
    }
    if m == 2 {
        out[1] = 0.5 * h * (values[0] + values[1]);
        return out;
    }
    for i in 1..m {
        if i % 2 == 0 {
            out[i] = out[i - 2] + h / 3.0 * (values[i - 2] + 4.0 * values[i - 1] + values[i]);
        } else if i + 1 < m {
            out[i] = out[i - 1] + h / 12.0 * (5.0 * values[i - 1] + 8.0 * values[i] - values[i + 1]);
        } else {
            // last sample, odd index: integrate backwards from the right end
            out[i] = out[i - 1] + h / 12.0 * (-values[i - 2] + 8.0 * values[i - 1] + 5.0 * values[i]);
        }
    }
    out
}

/// Fourth-order central difference `f'(t_i)` for `2 <= i < len - 2`.
pub fn central_derivative4(values: &[f64], i: usize, h: f64) -> Result<f64> {
    if i < 2 || i + 2 >= values.len() {
        return Err(Error::InvalidArgument(format!(
            "index {i} lacks a five-point stencil in {} samples",
            values.len()
        )));
    }
    Ok((values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h))
}
