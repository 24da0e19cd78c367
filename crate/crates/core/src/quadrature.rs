//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 50;

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::NonConvergence(format!("quadrature on [{a}, {b}]")));
    }
    Ok(refine(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)?
        + refine(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)?)
}

/// Integral of `f` over `[a, b]` to relative tolerance `rel_tol`, measured
/// against a first-pass estimate of `∫|f|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    // Start from a few panels so narrow peaks are not missed entirely.
    let panels = 64;
    let w = (b - a) / panels as f64;
    let cells: Vec<(f64, f64, f64, f64, f64, f64, f64)> = (0..panels)
        .map(|i| {
            let lo = a + w * i as f64;
            let hi = if i + 1 == panels { b } else { lo + w };
            let (flo, fhi) = (f(lo), f(hi));
            let (m, fm, whole) = simpson(&f, lo, flo, hi, fhi);
            (lo, flo, hi, fhi, m, fm, whole)
        })
        .collect();
    let scale: f64 = cells.iter().map(|c| (c.2 - c.0) / 6.0 * (c.1.abs() + 4.0 * c.5.abs() + c.3.abs())).sum();
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE) / panels as f64;
    let mut total = 0.0;
    for (lo, flo, hi, fhi, m, fm, whole) in cells {
        total += refine(&f, lo, flo, hi, fhi, m, fm, whole, tol, MAX_DEPTH)?;
    }
    Ok(total)
}
