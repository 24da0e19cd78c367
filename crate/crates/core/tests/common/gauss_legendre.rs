//! Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on
//! the Legendre recurrence.

#![allow(dead_code)]

pub fn nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of `f` over S² using a product rule in (cos θ, φ).
pub fn sphere2(f: impl Fn(&[f64]) -> f64, n_theta: usize, n_phi: usize) -> f64 {
    let mut total = 0.0;
    for (t, w) in nodes(n_theta) {
        let s = (1.0 - t * t).sqrt();
        let mut ring = 0.0;
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            ring += f(&[s * phi.cos(), s * phi.sin(), t]);
        }
        total += w * ring * 2.0 * std::f64::consts::PI / n_phi as f64;
    }
    total
}

/// Integral of `f` over S¹ by the trapezoid rule in angle.
pub fn circle(f: impl Fn(&[f64]) -> f64, m: usize) -> f64 {
    let step = 2.0 * std::f64::consts::PI / m as f64;
    (0..m).map(|j| f(&[(j as f64 * step).cos(), (j as f64 * step).sin()])).sum::<f64>() * step
}
