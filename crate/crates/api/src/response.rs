//! Results of every operation and the versioned envelope around them.

use quadratik_core::clustering::{ClusterSummary, ElbowPoint, MixtureFit, ValidationReport};
use quadratik_core::gof::{TestOutcome, TestSummary};
use quadratik_core::stats::SummaryTable;
use quadratik_core::tuning::TuningResult;
use quadratik_core::uniformity::UniformityOutcome;
use quadratik_core::DataMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, Result};
use crate::request::Operation;

/// Bumped on any incompatible change to request or result layouts.
pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub outcome: TestOutcome,
    pub summary: TestSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub outcome: UniformityOutcome,
    pub summary: SummaryTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    Circle,
    Sphere,
}

/// Coordinates as separate series, ready for a scatter plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPlot {
    pub kind: PlotKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Option<Vec<f64>>,
}

impl ScatterPlot {
    /// Raw coordinates for `d = 2` or `3`, otherwise `None`.
    pub fn of(points: &DataMatrix) -> Option<Self> {
        let kind = match points.d() {
            2 => PlotKind::Circle,
            3 => PlotKind::Sphere,
            _ => return None,
        };
        Some(Self {
            kind,
            x: points.column(0),
            y: points.column(1),
            z: (points.d() == 3).then(|| points.column(2)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub samples: DataMatrix,
    pub proposals_used: u64,
    pub acceptance_rate: f64,
    /// Absent when `d > 3`.
    pub plot: Option<ScatterPlot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityResult {
    pub densities: Vec<f64>,
}

/// Label-free and label-based metrics of one fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMetrics {
    pub k: usize,
    pub igp: Vec<Option<f64>>,
    pub ari: Option<f64>,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// Whether rows were rescaled to unit length before fitting.
    pub normalized: bool,
    /// One fit per requested `k`, in ascending order.
    pub fits: Vec<MixtureFit>,
    pub elbow: Vec<ElbowPoint>,
    pub elbow_k_euclidean: Option<usize>,
    pub elbow_k_cosine: Option<usize>,
    /// Display coordinates of the fitted rows.
    pub coordinates: DataMatrix,
    /// True when the coordinates are principal component scores.
    pub projected: bool,
    pub metrics: Vec<ClusterMetrics>,
}

/// Untagged on the wire; the variant is implied by the operation. Prefer
/// [`Output::from_value`] when the operation is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Output {
    Test(TestReport),
    Uniformity(UniformityReport),
    Tuning(TuningResult),
    Sample(SampleResult),
    Density(DensityResult),
    Clustering(ClusteringResult),
    Validation(ValidationReport),
    Summary(ClusterSummary),
}

fn typed<T: DeserializeOwned>(v: serde_json::Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| ApiError::invalid(format!("malformed result: {e}")))
}

impl Output {
    /// Decode a result whose layout is fixed by the operation.
    pub fn from_value(op: &Operation, v: serde_json::Value) -> Result<Self> {
        Ok(match op {
            Operation::NormalTest(_) | Operation::TwosampleTest(_) | Operation::KsampleTest(_) => {
                Self::Test(typed(v)?)
            }
            Operation::UniformityTest(_) => Self::Uniformity(typed(v)?),
            Operation::SelectH(_) => Self::Tuning(typed(v)?),
            Operation::PkbdSample(_) => Self::Sample(typed(v)?),
            Operation::PkbdDensity(_) => Self::Density(typed(v)?),
            Operation::Cluster(_) => Self::Clustering(typed(v)?),
            Operation::Validate(_) => Self::Validation(typed(v)?),
            Operation::Summary(_) => Self::Summary(typed(v)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<R = Output> {
    pub schema_version: String,
    pub seed: u64,
    pub request: Operation,
    pub result: R,
}

impl Envelope {
    pub fn new(request: Operation, seed: u64, result: Output) -> Self {
        Self { schema_version: SCHEMA_VERSION.to_string(), seed, request, result }
    }

    /// Parse a serialized envelope back into typed form.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Envelope<serde_json::Value> =
            serde_json::from_str(text).map_err(|e| ApiError::invalid(format!("malformed envelope: {e}")))?;
        Self::from_raw(raw)
    }

    /// Type the result of an envelope decoded with an opaque result.
    pub fn from_raw(raw: Envelope<serde_json::Value>) -> Result<Self> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(ApiError::invalid(format!(
                "schema version {} is not supported (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        let result = Output::from_value(&raw.request, raw.result)?;
        Ok(Self { schema_version: raw.schema_version, seed: raw.seed, request: raw.request, result })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }
}
