//! Types exchanged with the HTTP service.

use quadratik_core::stats::VariableSummary;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::response::Envelope;

/// Largest accepted upload, per file.
pub const MAX_UPLOAD_BYTES: usize = 20 * 1024 * 1024;

/// Response to an upload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub dataset_id: String,
    pub rows: usize,
    pub columns: usize,
    pub header: Option<Vec<String>>,
    /// One entry per column.
    pub column_summary: Vec<VariableSummary>,
}

/// Where an operation takes its data from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DataRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_id: Option<String>,
    /// 1-based column of `dataset_id` holding group labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels_col: Option<usize>,
    /// Inline group labels, one per row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
    /// Second sample of the two-sample test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_dataset_id: Option<String>,
    /// Inline rows, an alternative to `dataset_id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

/// Body of every compute endpoint: a data reference, a seed and the
/// operation parameters, all at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceRequest<T> {
    #[serde(flatten)]
    pub data: DataRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub params: T,
}

/// Body of `/v1/clustering/ksample-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsampleCheckRequest {
    pub fit_id: String,
    /// Number of clusters of the fit whose partition is tested.
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub test: crate::request::SampleTestRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
    Cancelled,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Done | Self::Failed | Self::Cancelled)
    }
}

/// A background job. Clients holding an untyped envelope can recover
/// the typed form with [`Envelope::from_raw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord<E = Envelope> {
    pub job_id: String,
    /// Operation name, e.g. `select-h`.
    pub kind: String,
    pub status: JobStatus,
    pub result: Option<E>,
    pub error: Option<ErrorBody>,
    /// Handle of the stored fits, for finished clustering jobs.
    pub fit_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub detail: Option<serde_json::Value>,
}

impl From<&ApiError> for ErrorBody {
    fn from(e: &ApiError) -> Self {
        let detail = match e {
            ApiError::Parse { row, column, .. } => Some(serde_json::json!({ "row": row, "column": column })),
            _ => None,
        };
        Self { code: e.code().to_string(), message: e.to_string(), detail }
    }
}
