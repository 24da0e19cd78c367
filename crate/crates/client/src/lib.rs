//! Thin async client for the quadratik HTTP service.

use std::time::Duration;

use quadratik_api::http::{DatasetInfo, ErrorBody, JobRecord, JobStatus, KsampleCheckRequest, ServiceRequest};
use quadratik_api::request::*;
use quadratik_api::{CsvOptions, Envelope};
use reqwest::multipart::{Form, Part};
use reqwest::{Method, RequestBuilder, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error payload.
    #[error("service returned {status}: {}", .body.message)]
    Service { status: StatusCode, body: ErrorBody },
    #[error("cannot reach the service")]
    Transport(#[from] reqwest::Error),
    #[error("malformed response: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Route of the synchronous endpoint serving `op`, or of the job endpoint
/// for select-h and cluster.
pub fn route(op: &Operation) -> Option<&'static str> {
    Some(match op {
        Operation::NormalTest(_) => "/v1/tests/normality",
        Operation::TwosampleTest(_) => "/v1/tests/twosample",
        Operation::KsampleTest(_) => "/v1/tests/ksample",
        Operation::UniformityTest(_) => "/v1/tests/uniformity",
        Operation::SelectH(_) => "/v1/tuning/select-h",
        Operation::PkbdSample(_) => "/v1/pkbd/sample",
        Operation::PkbdDensity(_) => "/v1/pkbd/density",
        Operation::Cluster(_) => "/v1/clustering/run",
        Operation::Validate(_) | Operation::Summary(_) => return None,
    })
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
    poll: Duration,
}

impl Client {
    pub fn new(base_url: &str) -> Self {
        Self { base: base_url.trim_end_matches('/').to_string(), http: reqwest::Client::new(), poll: Duration::from_millis(200) }
    }

    /// Interval between job status polls in [`Client::wait`].
    pub fn with_poll_interval(mut self, poll: Duration) -> Self {
        self.poll = poll;
        self
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn send<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T> {
        let resp = req.send().await?;
        let status = resp.status();
        let bytes = resp.bytes().await?;
        if !status.is_success() {
            let body = serde_json::from_slice(&bytes).unwrap_or_else(|_| ErrorBody {
                code: "http".into(),
                message: String::from_utf8_lossy(&bytes).into_owned(),
                detail: None,
            });
            return Err(ClientError::Service { status, body });
        }
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        self.send(self.request(Method::POST, path).json(body)).await
    }

    async fn envelope(&self, path: &str, body: &impl Serialize) -> Result<Envelope> {
        let raw: Envelope<serde_json::Value> = self.post(path, body).await?;
        Envelope::from_raw(raw).map_err(|e| ClientError::Decode(e.to_string()))
    }

    pub async fn health(&self) -> Result<serde_json::Value> {
        self.send(self.request(Method::GET, "/v1/health")).await
    }

    pub async fn openapi(&self) -> Result<serde_json::Value> {
        self.send(self.request(Method::GET, "/v1/openapi.json")).await
    }

    pub async fn upload(&self, file_name: &str, bytes: Vec<u8>, opts: CsvOptions) -> Result<DatasetInfo> {
        let form = Form::new()
            .text("delimiter", String::from(opts.delimiter))
            .text("has_header", opts.has_header.to_string())
            .part("file", Part::bytes(bytes).file_name(file_name.to_string()));
        self.send(self.request(Method::POST, "/v1/data").multipart(form)).await
    }

    pub async fn dataset(&self, id: &str) -> Result<DatasetInfo> {
        self.send(self.request(Method::GET, &format!("/v1/data/{id}"))).await
    }

    /// Run a synchronous operation.
    pub async fn run<T: Serialize>(&self, path: &str, req: &ServiceRequest<T>) -> Result<Envelope> {
        self.envelope(path, req).await
    }

    pub async fn ksample_check(&self, req: &KsampleCheckRequest) -> Result<Envelope> {
        self.envelope("/v1/clustering/ksample-check", req).await
    }

    pub async fn submit<T: Serialize>(&self, path: &str, req: &ServiceRequest<T>) -> Result<JobRecord> {
        self.typed_job(self.post(path, req).await?)
    }

    fn typed_job(&self, raw: JobRecord<Envelope<serde_json::Value>>) -> Result<JobRecord> {
        let result = raw
            .result
            .map(Envelope::from_raw)
            .transpose()
            .map_err(|e| ClientError::Decode(e.to_string()))?;
        Ok(JobRecord {
            job_id: raw.job_id,
            kind: raw.kind,
            status: raw.status,
            result,
            error: raw.error,
            fit_id: raw.fit_id,
        })
    }

    pub async fn job(&self, id: &str) -> Result<JobRecord> {
        let raw = self.send(self.request(Method::GET, &format!("/v1/jobs/{id}"))).await?;
        self.typed_job(raw)
    }

    pub async fn cancel(&self, id: &str) -> Result<JobRecord> {
        let raw = self.send(self.request(Method::DELETE, &format!("/v1/jobs/{id}"))).await?;
        self.typed_job(raw)
    }

    /// Poll until the job reaches a terminal state.
    pub async fn wait(&self, id: &str) -> Result<JobRecord> {
        loop {
            let j = self.job(id).await?;
            if j.status.is_terminal() {
                return Ok(j);
            }
            tokio::time::sleep(self.poll).await;
        }
    }

    /// Submit a job and wait for its envelope; a failed job becomes
    /// [`ClientError::Service`] with the job's error payload.
    pub async fn run_job<T: Serialize>(&self, path: &str, req: &ServiceRequest<T>) -> Result<JobRecord> {
        let j = self.submit(path, req).await?;
        let j = self.wait(&j.job_id).await?;
        match j.status {
            JobStatus::Done => Ok(j),
            _ => Err(ClientError::Service {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: j.error.unwrap_or_else(|| ErrorBody {
                    code: "cancelled".into(),
                    message: format!("job {} was cancelled", j.job_id),
                    detail: None,
                }),
            }),
        }
    }
}
