use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::resample::parallel_replicates;
use super::statistic::{one_sample_statistics, OneSampleKernel};
use super::{decisions, validate_quantile, CvMethod, TestKind, TestOutcome};
use crate::data::DataMatrix;
use crate::error::{invalid, Error, Result};
use crate::kernels::{Bandwidth, ParametricCentering};
use crate::linalg::cholesky;
use crate::rng::SeededRandomSource;
use crate::stats::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// Closed-form centering at `N(mu, sigma)`.
    Param,
    /// Centering against the empirical distribution of the sample.
    Nonparam,
}

impl std::str::FromStr for Centering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "param" => Ok(Self::Param),
            "nonparam" => Ok(Self::Nonparam),
            other => Err(invalid(format!("unknown centering {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityConfig {
    pub h: Bandwidth,
    /// Reference mean, zero when absent.
    pub mu: Option<Vec<f64>>,
    /// Reference covariance, identity when absent.
    pub sigma: Option<DMatrix<f64>>,
    pub centering: Centering,
    pub replicates: usize,
    pub quantile: f64,
}

impl NormalityConfig {
    pub fn new(h: Bandwidth) -> Self {
        Self { h, mu: None, sigma: None, centering: Centering::Param, replicates: 150, quantile: 0.95 }
    }
}

fn statistic(x: &DataMatrix, centering: Centering, pc: &ParametricCentering, h: Bandwidth) -> Result<(f64, f64)> {
    match centering {
        Centering::Param => one_sample_statistics(x, OneSampleKernel::Parametric(pc)),
        Centering::Nonparam => one_sample_statistics(x, OneSampleKernel::Nonparametric(h)),
    }
}

/// Test `x` against `N(mu, sigma)`. The critical value is the empirical
/// quantile of `U_n` over samples of the same size drawn from the null.
pub fn normality_test(x: &DataMatrix, cfg: &NormalityConfig, source: SeededRandomSource) -> Result<TestOutcome> {
    let (n, d) = (x.n(), x.d());
    if cfg.replicates < 1 {
        return Err(invalid("at least one replicate is required"));
    }
    validate_quantile(cfg.quantile)?;
    let mu = cfg.mu.clone().unwrap_or_else(|| vec![0.0; d]);
    let sigma = cfg.sigma.clone().unwrap_or_else(|| DMatrix::identity(d, d));
    if mu.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mu.len() });
    }
    let pc = ParametricCentering::new(cfg.h, &mu, &sigma)?;
    let chol = cholesky(&sigma)?;
    let (u, v) = statistic(x, cfg.centering, &pc, cfg.h)?;

    let null = parallel_replicates(cfg.replicates, source, |rng| {
        let mut values = Vec::with_capacity(n * d);
        let mut z = vec![0.0; d];
        for _ in 0..n {
            z.iter_mut().for_each(|zi| *zi = rng.sample(StandardNormal));
            for i in 0..d {
                let mut s = mu[i];
                for j in 0..=i {
                    s += chol[(i, j)] * z[j];
                }
                values.push(s);
            }
        }
        let sample = DataMatrix::new(values, n, d)?;
        Ok(statistic(&sample, cfg.centering, &pc, cfg.h)?.0)
    })?;
    let cv = quantile(&null, cfg.quantile);
    let statistics = vec![u];
    let critical_values = vec![cv];
    Ok(TestOutcome {
        test: TestKind::Normality,
        reject: decisions(&statistics, &critical_values),
        statistics,
        critical_values,
        cv_method: CvMethod::Empirical,
        h: cfg.h.get(),
        quantile: cfg.quantile,
        replicates: cfg.replicates,
        fraction: None,
        centering: Some(cfg.centering),
        v_statistic: Some(v),
        distance_matrix: None,
    })
}
