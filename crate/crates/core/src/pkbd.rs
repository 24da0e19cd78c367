//! Poisson kernel-based distributions on the sphere `S^{d-1}`.
//!
//! The density with mean direction `μ` and concentration `ρ` is
//! `(1 - ρ²) / (ω_d (1 + ρ² - 2ρ x·μ)^{d/2})`. Two exact samplers are
//! provided, both acceptance-rejection:
//!
//! * `rejvmf`: von Mises-Fisher proposals with `κ = dρ / (1 + ρ²)`. The
//!   envelope constant is the numerical maximum of the density ratio in
//!   `t = x·μ`. Acceptance falls towards zero as `ρ → 1`.
//! * `rejacg`: angular central Gaussian proposals with precision
//!   `I - βμμᵀ`. The inner maximum over `t` has a closed form and `β` is
//!   chosen to minimize the envelope constant.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, UNIT_NORM_RENORM_TOL, UNIT_NORM_TOL};
use crate::error::{invalid, Error, Result};
use crate::kernels::Concentration;
use crate::linalg::{dot, norm};
use crate::quadrature::integrate;
use crate::roots::maximize_bounded;
use crate::special::sphere_area;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkbdParams {
    pub mu: Vec<f64>,
    pub rho: Concentration,
}

impl PkbdParams {
    /// Validates `μ` under the unit-norm policy (renormalized when close).
    pub fn new(mu: Vec<f64>, rho: Concentration) -> Result<Self> {
        if mu.len() < 2 {
            return Err(invalid("mean direction needs dimension at least 2"));
        }
        let n = norm(&mu);
        let off = (n - 1.0).abs();
        if off > UNIT_NORM_RENORM_TOL {
            return Err(Error::NotUnitNorm { row: 0, norm: n });
        }
        let mu = if off > UNIT_NORM_TOL { mu.iter().map(|v| v / n).collect() } else { mu };
        Ok(Self { mu, rho })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Log density as a function of `t = x·μ`.
pub fn log_dpkb_cos(t: f64, rho: f64, d: usize) -> f64 {
    log_dpkb_gap(1.0 - t, rho, d)
}

/// Log density as a function of `g = 1 - x·μ`. Writing the kernel
/// denominator as `(1-ρ)² + 2ρg` keeps it accurate when ρ and x·μ are both
/// near 1, where `1 + ρ² - 2ρt` loses most of its digits.
pub fn log_dpkb_gap(g: f64, rho: f64, d: usize) -> f64 {
    ((1.0 - rho) * (1.0 + rho)).ln() - sphere_area(d).ln() - d as f64 / 2.0 * kernel_denominator(g, rho).ln()
}

pub(crate) fn kernel_denominator(g: f64, rho: f64) -> f64 {
    (1.0 - rho) * (1.0 - rho) + 2.0 * rho * g
}

pub fn dpkb(x: &[f64], params: &PkbdParams) -> Result<f64> {
    let d = params.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let n = norm(x);
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NotUnitNorm { row: 0, norm: n });
    }
    let r = params.rho.get();
    Ok((1.0 - r * r) / (sphere_area(d) * (1.0 + r * r - 2.0 * r * dot(x, &params.mu)).powf(d as f64 / 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    Rejvmf,
    Rejacg,
    /// Reserved; not implemented.
    Rejpsaw,
}

impl std::str::FromStr for SamplerMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rejvmf" => Ok(Self::Rejvmf),
            "rejacg" => Ok(Self::Rejacg),
            "rejpsaw" => Ok(Self::Rejpsaw),
            other => Err(invalid(format!("unknown sampler {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerReport {
    pub samples: DataMatrix,
    pub proposals_used: u64,
    pub acceptance_rate: f64,
}

pub const PROPOSAL_CAP_FACTOR: u64 = 10_000;

pub fn rpkb<R: Rng + ?Sized>(n: usize, params: &PkbdParams, method: SamplerMethod, rng: &mut R) -> Result<SamplerReport> {
    match method {
        SamplerMethod::Rejvmf => rpkb_rejvmf(n, params, rng),
        SamplerMethod::Rejacg => rpkb_rejacg(n, params, rng),
        SamplerMethod::Rejpsaw => Err(Error::Unsupported("rejpsaw sampler is not available".into())),
    }
}

fn run_sampler<R: Rng + ?Sized, F>(n: usize, d: usize, rng: &mut R, mut propose: F) -> Result<SamplerReport>
where
    F: FnMut(&mut R, &mut [f64]) -> bool,
{
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let cap = PROPOSAL_CAP_FACTOR * n as u64;
    let mut values = Vec::with_capacity(n * d);
    let mut buf = vec![0.0; d];
    let mut proposals = 0u64;
    let mut accepted = 0;
    while accepted < n {
        if proposals >= cap {
            return Err(Error::NonConvergence(format!("sampler exceeded {cap} proposals")));
        }
        proposals += 1;
        if propose(rng, &mut buf) {
            values.extend_from_slice(&buf);
            accepted += 1;
        }
    }
    Ok(SamplerReport {
        samples: DataMatrix::new(values, n, d)?,
        proposals_used: proposals,
        acceptance_rate: n as f64 / proposals as f64,
    })
}

/// Uniform unit vector orthogonal to unit `mu`, written into `out`.
fn tangent_direction<R: Rng + ?Sized>(mu: &[f64], rng: &mut R, out: &mut [f64]) {
    loop {
        out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let p = dot(out, mu);
        out.iter_mut().zip(mu).for_each(|(v, m)| *v -= p * m);
        let n = norm(out);
        if n > 1e-12 {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// Wood's sampler for the cosine `t = x·μ` of a vMF(κ) draw on `S^{d-1}`.
struct VmfCosine {
    kappa: f64,
    b: f64,
    x0: f64,
    c: f64,
    dm1: f64,
    beta: Beta<f64>,
}

impl VmfCosine {
    fn new(kappa: f64, d: usize) -> Result<Self> {
        let dm1 = d as f64 - 1.0;
        // b = (-2κ + sqrt(4κ² + (d-1)²)) / (d-1), rationalized for small κ.
        let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(dm1 / 2.0, dm1 / 2.0).map_err(|e| invalid(e.to_string()))?;
        Ok(Self { kappa, b, x0, c, dm1, beta })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let z = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if self.kappa * w + self.dm1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return w;
            }
        }
    }
}

/// `n` draws from the von Mises-Fisher distribution with unit mean `mu`
/// and concentration `kappa > 0`.
pub fn rvmf<R: Rng + ?Sized>(n: usize, mu: &[f64], kappa: f64, rng: &mut R) -> Result<DataMatrix> {
    let d = mu.len();
    if d < 2 || n == 0 || !(kappa > 0.0) {
        return Err(invalid("vMF sampling needs d >= 2, n >= 1 and kappa > 0"));
    }
    let cosine = VmfCosine::new(kappa, d)?;
    let mut values = Vec::with_capacity(n * d);
    let mut dir = vec![0.0; d];
    for _ in 0..n {
        let t = cosine.sample(rng);
        tangent_direction(mu, rng, &mut dir);
        let s = (1.0 - t * t).max(0.0).sqrt();
        values.extend(mu.iter().zip(&dir).map(|(m, v)| t * m + s * v));
    }
    DataMatrix::new(values, n, d)
}

/// vMF-envelope rejection sampler.
pub fn rpkb_rejvmf<R: Rng + ?Sized>(n: usize, params: &PkbdParams, rng: &mut R) -> Result<SamplerReport> {
    let d = params.dim();
    let rho = params.rho.get();
    let kappa = d as f64 * rho / (1.0 + rho * rho);
    let half_d = d as f64 / 2.0;
    let log_ratio = |t: f64| -half_d * (1.0 + rho * rho - 2.0 * rho * t).ln() - kappa * t;
    let (_, log_m) = maximize_bounded(log_ratio, -1.0, 1.0, 1e-12);
    let cosine = VmfCosine::new(kappa, d)?;
    let mu = params.mu.clone();
    let mut dir = vec![0.0; d];
    run_sampler(n, d, rng, |rng, out| {
        let t = cosine.sample(rng);
        let u: f64 = rng.random();
        if u.ln() > log_ratio(t) - log_m {
            return false;
        }
        tangent_direction(&mu, rng, &mut dir);
        let s = (1.0 - t * t).max(0.0).sqrt();
        for i in 0..out.len() {
            out[i] = t * mu[i] + s * dir[i];
        }
        true
    })
}

/// Log envelope constant of the ACG proposal with shape `β`, up to the
/// `β`-free factor `(1 - ρ²) / (1 + ρ²)^{d/2}`.
fn acg_log_bound(beta: f64, lambda: f64, d: usize) -> f64 {
    let psi = |t: f64| (1.0 - beta * t * t) / (1.0 - lambda * t);
    let mut best = psi(1.0).max(psi(-1.0));
    if beta > 0.0 && beta >= lambda * lambda {
        let t = (1.0 - (1.0 - lambda * lambda / beta).sqrt()) / lambda;
        if t.abs() <= 1.0 {
            best = best.max(psi(t));
        }
    }
    -0.5 * (1.0 - beta).ln() + d as f64 / 2.0 * best.ln()
}

/// Shape `β ∈ [0, 1)` minimizing the ACG envelope constant.
pub fn acg_optimal_beta(rho: f64, d: usize) -> f64 {
    let lambda = 2.0 * rho / (1.0 + rho * rho);
    // Search over s = -log10(1 - β), so β approaches 1 geometrically.
    let obj = |s: f64| -acg_log_bound(1.0 - 10f64.powf(-s), lambda, d);
    let grid: Vec<f64> = (0..=240).map(|i| i as f64 * 0.05).collect();
    let mut best = 0usize;
    for (i, &s) in grid.iter().enumerate() {
        if obj(s) > obj(grid[best]) {
            best = i;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (s, v) = maximize_bounded(obj, lo, hi, 1e-12);
    let beta = if v >= obj(grid[best]) { 1.0 - 10f64.powf(-s) } else { 1.0 - 10f64.powf(-grid[best]) };
    if obj(0.0) >= -acg_log_bound(beta, lambda, d) {
        0.0
    } else {
        beta
    }
}

/// Expected acceptance rate of the ACG sampler, `1 / M`.
pub fn acg_acceptance(rho: f64, d: usize) -> f64 {
    let lambda = 2.0 * rho / (1.0 + rho * rho);
    let beta = acg_optimal_beta(rho, d);
    let log_m = (1.0 - rho * rho).ln() - d as f64 / 2.0 * (1.0 + rho * rho).ln() + acg_log_bound(beta, lambda, d);
    (-log_m).exp()
}

/// Angular central Gaussian envelope rejection sampler.
pub fn rpkb_rejacg<R: Rng + ?Sized>(n: usize, params: &PkbdParams, rng: &mut R) -> Result<SamplerReport> {
    let d = params.dim();
    let rho = params.rho.get();
    let lambda = 2.0 * rho / (1.0 + rho * rho);
    let beta = acg_optimal_beta(rho, d);
    let log_bound = acg_log_bound(beta, lambda, d);
    if !log_bound.is_finite() {
        return Err(Error::NonConvergence("envelope optimization failed".into()));
    }
    let half_d = d as f64 / 2.0;
    let stretch = 1.0 / (1.0 - beta).sqrt() - 1.0;
    let mu = params.mu.clone();
    run_sampler(n, d, rng, |rng, out| {
        out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let p = dot(out, &mu) * stretch;
        out.iter_mut().zip(&mu).for_each(|(v, m)| *v += p * m);
        let nz = norm(out);
        out.iter_mut().for_each(|v| *v /= nz);
        let t = dot(out, &mu).clamp(-1.0, 1.0);
        let log_accept = -0.5 * (1.0 - beta).ln() + half_d * ((1.0 - beta * t * t) / (1.0 - lambda * t)).ln() - log_bound;
        let u: f64 = rng.random();
        u.ln() <= log_accept
    })
}

/// `E[x·μ]` by quadrature of the marginal density of the cosine.
pub fn expected_cosine(params: &PkbdParams) -> Result<f64> {
    let d = params.dim();
    let rho = params.rho.get();
    let pi = std::f64::consts::PI;
    // With t = cos θ the surface weight (1-t²)^{(d-3)/2} dt becomes sin^{d-2} θ dθ.
    let w = |th: f64| (1.0 + rho * rho - 2.0 * rho * th.cos()).powf(-(d as f64) / 2.0) * th.sin().powi(d as i32 - 2);
    let mass = integrate(w, 0.0, pi, 1e-12)?;
    let first = integrate(|th| th.cos() * w(th), 0.0, pi, 1e-12)?;
    Ok(first / mass)
}
