//! Poisson kernel test of uniformity on the sphere `S^{d-1}`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::gof::{one_sample_statistics, OneSampleKernel};
use crate::kernels::Concentration;
use crate::rng::SeededRandomSource;
use crate::special::chi_square_quantile;
use crate::stats::quantile;

/// Null variance of the U-statistic.
pub fn variance_un(n: usize, d: usize, rho: Concentration) -> f64 {
    let r = rho.get();
    let nf = n as f64;
    let bracket = (1.0 + r * r) / (1.0 - r * r).powi(d as i32 - 1) - 1.0;
    2.0 / (nf * (nf - 1.0)) * bracket
}

/// Degrees of freedom and scale `c` of the χ² approximation for `S_n`.
///
/// Differences of near-equal powers are formed with `expm1`/`ln_1p` so the
/// small-`ρ` limit (`dof → d`) stays accurate.
pub fn dof_and_c(d: usize, rho: Concentration) -> (f64, f64) {
    let r = rho.get();
    let dm1 = d as f64 - 1.0;
    // (1-ρ²)^{d-1} - 1 and (1-ρ)^{d-1} - 1
    let a = (dm1 * (-r * r).ln_1p()).exp_m1();
    let b = (dm1 * (-r).ln_1p()).exp_m1();
    let trace_sq = r * r - a; // 1 + ρ² - (1-ρ²)^{d-1}
    let lead = r - b; // 1 + ρ - (1-ρ)^{d-1}
    let ratio = ((1.0 + r) / (1.0 - r)).powf(dm1);
    let dof = ratio * lead * lead / trace_sq;
    let denom = (d as f64 * r.ln_1p()).exp_m1() - a; // (1+ρ)^d - (1-ρ²)^{d-1}
    (dof, trace_sq / denom)
}

/// Analytic cutoff `c · χ²_q(dof)` for `S_n`.
pub fn vn_cutoff(d: usize, rho: Concentration, q: f64) -> Result<f64> {
    let (dof, c) = dof_and_c(d, rho);
    Ok(c * chi_square_quantile(q, dof)?)
}

/// Rows drawn uniformly on `S^{d-1}` by normalizing Gaussian vectors.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<DataMatrix> {
    if n == 0 || d < 2 {
        return Err(invalid("uniform sphere sample needs n >= 1 and d >= 2"));
    }
    let mut values = Vec::with_capacity(n * d);
    let mut z = vec![0.0f64; d];
    for _ in 0..n {
        loop {
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-150 {
                values.extend(z.iter().map(|v| v / norm));
                break;
            }
        }
    }
    DataMatrix::new(values, n, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformityConfig {
    pub rho: Concentration,
    pub replicates: usize,
    pub quantile: f64,
}

impl UniformityConfig {
    pub fn new(rho: Concentration) -> Self {
        Self { rho, replicates: 300, quantile: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityOutcome {
    pub un: f64,
    /// `U_n / sqrt(Var(U_n))`.
    pub tn_normalized: f64,
    pub un_critical: f64,
    /// `S_n`, the diagonal-inclusive statistic scaled by `1/n`.
    pub vn: f64,
    pub vn_cutoff: f64,
    pub dof: f64,
    pub c_constant: f64,
    pub rho: f64,
    pub quantile: f64,
    pub replicates: usize,
    pub reject_u: bool,
    pub reject_v: bool,
}

pub fn pk_test(x: &DataMatrix, cfg: &UniformityConfig, source: SeededRandomSource) -> Result<UniformityOutcome> {
    let x = x.ensure_unit_rows()?;
    let (n, d) = (x.n(), x.d());
    if n < 2 || d < 2 {
        return Err(invalid("uniformity test needs n >= 2 and d >= 2"));
    }
    if cfg.replicates < 1 {
        return Err(invalid("at least one replicate is required"));
    }
    let kernel = OneSampleKernel::Poisson(cfg.rho);
    let (un, v) = one_sample_statistics(&x, kernel)?;
    let vn = v * n as f64;
    let (dof, c) = dof_and_c(d, cfg.rho);
    let vn_cut = c * chi_square_quantile(cfg.quantile, dof)?;
    let null = crate::gof::parallel_replicates(cfg.replicates, source, |rng| {
        let s = sample_uniform_sphere(n, d, rng)?;
        Ok(one_sample_statistics(&s, kernel)?.0)
    })?;
    let un_critical = quantile(&null, cfg.quantile);
    Ok(UniformityOutcome {
        un,
        tn_normalized: un / variance_un(n, d, cfg.rho).sqrt(),
        un_critical,
        vn,
        vn_cutoff: vn_cut,
        dof,
        c_constant: c,
        rho: cfg.rho.get(),
        quantile: cfg.quantile,
        replicates: cfg.replicates,
        reject_u: un > un_critical,
        reject_v: vn > vn_cut,
    })
}
