//! Requests for every operation. Omitted fields take library defaults.

use quadratik_core::clustering::StoppingRule;
use quadratik_core::gof::{Centering, ResamplingPlan};
use quadratik_core::pkbd::SamplerMethod;
use quadratik_core::tuning::AlternativeFamily;
use serde::{Deserialize, Serialize};

fn default_normality_replicates() -> usize {
    150
}

fn default_uniformity_replicates() -> usize {
    300
}

fn default_quantile() -> f64 {
    0.95
}

fn default_centering() -> Centering {
    Centering::Param
}

fn default_runs() -> usize {
    50
}

fn default_method() -> SamplerMethod {
    SamplerMethod::Rejvmf
}

fn default_max_iter() -> usize {
    300
}

fn default_stopping_rule() -> StoppingRule {
    StoppingRule::Loglik
}

fn default_num_init() -> usize {
    10
}

fn default_loglik_tol() -> f64 {
    1e-7
}

fn default_true() -> bool {
    true
}

fn default_validation_h() -> f64 {
    1.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityRequest {
    pub h: f64,
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    /// Reference covariance as rows.
    #[serde(default)]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_centering")]
    pub centering: Centering,
    #[serde(default = "default_normality_replicates")]
    pub replicates: usize,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
}

/// Two-sample and k-sample tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTestRequest {
    pub h: f64,
    #[serde(flatten)]
    pub plan: ResamplingPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityRequest {
    pub rho: f64,
    #[serde(default = "default_uniformity_replicates")]
    pub replicates: usize,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectHRequest {
    pub alternative: AlternativeFamily,
    /// Family default when absent.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub h_grid: Option<Vec<f64>>,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(flatten)]
    pub plan: ResamplingPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkbdSampleRequest {
    pub n: usize,
    pub rho: f64,
    pub mu: Vec<f64>,
    #[serde(default = "default_method")]
    pub method: SamplerMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkbdDensityRequest {
    pub rho: f64,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRequest {
    /// Cluster counts to fit.
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_stopping_rule")]
    pub stopping_rule: StoppingRule,
    #[serde(default = "default_num_init")]
    pub num_init: usize,
    #[serde(default = "default_loglik_tol")]
    pub loglik_tol: f64,
    /// Rescale rows to unit length before fitting.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

impl ClusterRequest {
    pub fn new(k: Vec<usize>) -> Self {
        Self {
            k,
            max_iter: default_max_iter(),
            stopping_rule: default_stopping_rule(),
            num_init: default_num_init(),
            loglik_tol: default_loglik_tol(),
            normalize: true,
        }
    }
}

/// Validation of fitted mixtures. Fits are computed from `cluster` unless
/// supplied with the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRequest {
    #[serde(flatten)]
    pub cluster: ClusterRequest,
    /// Bandwidth of the k-sample test on each fitted partition.
    #[serde(default = "default_validation_h")]
    pub h: f64,
    #[serde(flatten)]
    pub plan: ResamplingPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRequest {
    #[serde(flatten)]
    pub cluster: ClusterRequest,
    /// Number of clusters of the fit to summarize.
    pub num_clust: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operation", rename_all = "kebab-case")]
pub enum Operation {
    NormalTest(NormalityRequest),
    TwosampleTest(SampleTestRequest),
    KsampleTest(SampleTestRequest),
    UniformityTest(UniformityRequest),
    SelectH(SelectHRequest),
    PkbdSample(PkbdSampleRequest),
    PkbdDensity(PkbdDensityRequest),
    Cluster(ClusterRequest),
    Validate(ValidateRequest),
    Summary(SummaryRequest),
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NormalTest(_) => "normal-test",
            Self::TwosampleTest(_) => "twosample-test",
            Self::KsampleTest(_) => "ksample-test",
            Self::UniformityTest(_) => "uniformity-test",
            Self::SelectH(_) => "select-h",
            Self::PkbdSample(_) => "pkbd-sample",
            Self::PkbdDensity(_) => "pkbd-density",
            Self::Cluster(_) => "cluster",
            Self::Validate(_) => "validate",
            Self::Summary(_) => "summary",
        }
    }

    /// Whether the operation consumes an input data table.
    pub fn needs_data(&self) -> bool {
        !matches!(self, Self::PkbdSample(_))
    }
}
