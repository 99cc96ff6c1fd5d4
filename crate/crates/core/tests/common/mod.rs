//! Independent numerical oracles shared by the integration tests: composite
//! Simpson quadrature, classical fourth-order Runge-Kutta, and a slope
//! estimator for empirical convergence orders. Deliberately textbook
//! implementations with no code shared with the library under test.

#![allow(dead_code)]

/// Composite Simpson rule over [a, b] with n (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "Simpson needs an even panel count"
    );
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Classical RK4 for y' = f(t, y) from (t0, y0) to t1 in n steps; returns
/// the terminal value.
pub fn rk4<F: Fn(f64, f64) -> f64>(f: F, y0: f64, t0: f64, t1: f64, n: usize) -> f64 {
    let h = (t1 - t0) / n as f64;
    let mut t = t0;
    let mut y = y0;
    for _ in 0..n {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    y
}

/// Like [`rk4`] but returns the whole trajectory including both endpoints.
pub fn rk4_path<F: Fn(f64, f64) -> f64>(f: F, y0: f64, t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let h = (t1 - t0) / n as f64;
    let mut t = t0;
    let mut y = y0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(y);
    for _ in 0..n {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        out.push(y);
    }
    out
}

/// Mean log2 ratio of successive errors from a halving refinement study:
/// the observed convergence order.
pub fn observed_order(errors: &[f64]) -> f64 {
    assert!(errors.len() >= 2);
    let mut acc = 0.0;
    for pair in errors.windows(2) {
        acc += (pair[0] / pair[1]).log2();
    }
    acc / (errors.len() - 1) as f64
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
