//! Kernel-based quadratic distance goodness-of-fit tests.

mod ksample;
mod normality;
mod resample;
mod statistic;
mod summary;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub use ksample::{ksample_test, twosample_test};
pub use normality::{normality_test, Centering, NormalityConfig};
pub use resample::{critical_value, draw_replicate, parallel_replicates, subsample_size, CriticalValue, Replicate};
pub use statistic::{
    distance_from_indices, ksample_statistics, matrix_distance, one_sample_statistics, OneSampleKernel,
    two_sample_statistic, DistanceMatrix,
};
pub use summary::{normal_qq, summarize, two_sample_qq, QqSeries, TestSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Normality,
    TwoSample,
    KSample,
}

/// How the critical value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMethod {
    Empirical,
    Subsampling,
    Bootstrap,
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingMethod {
    Subsampling,
    Bootstrap,
    Permutation,
}

impl From<ResamplingMethod> for CvMethod {
    fn from(m: ResamplingMethod) -> Self {
        match m {
            ResamplingMethod::Subsampling => CvMethod::Subsampling,
            ResamplingMethod::Bootstrap => CvMethod::Bootstrap,
            ResamplingMethod::Permutation => CvMethod::Permutation,
        }
    }
}

impl std::str::FromStr for ResamplingMethod {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "subsampling" => Ok(Self::Subsampling),
            "bootstrap" => Ok(Self::Bootstrap),
            "permutation" => Ok(Self::Permutation),
            other => Err(invalid(format!("unknown resampling method {other:?}"))),
        }
    }
}

/// Resampling scheme for critical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResamplingPlan {
    pub method: ResamplingMethod,
    /// Number of replicates `B`.
    pub replicates: usize,
    /// Subsample fraction `b`, used by subsampling only.
    pub fraction: f64,
    pub quantile: f64,
}

impl Default for ResamplingPlan {
    fn default() -> Self {
        Self { method: ResamplingMethod::Subsampling, replicates: 150, fraction: 0.9, quantile: 0.95 }
    }
}

impl ResamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(invalid("at least one replicate is required"));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(invalid(format!("subsample fraction must lie in (0, 1], got {}", self.fraction)));
        }
        validate_quantile(self.quantile)
    }
}

pub(crate) fn validate_quantile(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("quantile must lie in (0, 1), got {q}")))
    }
}

/// Result of any KBQD test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub test: TestKind,
    pub statistics: Vec<f64>,
    pub critical_values: Vec<f64>,
    pub reject: Vec<bool>,
    pub cv_method: CvMethod,
    pub h: f64,
    pub quantile: f64,
    pub replicates: usize,
    /// Subsample fraction when `cv_method` is subsampling.
    pub fraction: Option<f64>,
    /// Normality test only: the centering used and the V-statistic.
    pub centering: Option<Centering>,
    pub v_statistic: Option<f64>,
    /// k-sample test only.
    pub distance_matrix: Option<DistanceMatrix>,
}

pub(crate) fn decisions(stats: &[f64], cvs: &[f64]) -> Vec<bool> {
    stats.iter().zip(cvs).map(|(s, c)| s > c).collect()
}
