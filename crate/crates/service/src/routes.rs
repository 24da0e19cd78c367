use axum::extract::multipart::MultipartRejection;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Multipart, Path, State};
use axum::http::StatusCode;
use axum::Json;
use quadratik_api::http::{DataRef, DatasetInfo, JobRecord, KsampleCheckRequest, ServiceRequest, MAX_UPLOAD_BYTES};
use quadratik_api::request::*;
use quadratik_api::{run, ApiError, CsvOptions, Delimiter, Envelope, Inputs, Output, Table, DEFAULT_SEED};
use quadratik_core::stats::VariableSummary;
use quadratik_core::{DataMatrix, GroupLabels};
use serde::de::DeserializeOwned;

use crate::error::ServiceError;
use crate::state::{FitRecord, Shared};

type Reply<T> = Result<Json<T>, ServiceError>;

fn body<T: DeserializeOwned>(b: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    b.map(|Json(v)| v).map_err(|e| ServiceError::BadRequest(e.body_text()))
}

pub async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "schema_version": quadratik_api::SCHEMA_VERSION }))
}

pub async fn openapi() -> Json<serde_json::Value> {
    Json(crate::openapi::document())
}

fn dataset_info(id: String, t: &Table) -> DatasetInfo {
    DatasetInfo {
        dataset_id: id,
        rows: t.rows,
        columns: t.columns,
        header: t.header.clone(),
        column_summary: (0..t.columns).map(|j| VariableSummary::of(&t.column(j))).collect(),
    }
}

/// Multipart fields: `file` (required), `delimiter`, `has_header`.
pub async fn upload(
    State(state): State<Shared>,
    form: Result<Multipart, MultipartRejection>,
) -> Result<(StatusCode, Json<DatasetInfo>), ServiceError> {
    let mut form = form.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    let mut opts = CsvOptions::default();
    let mut file = None;
    loop {
        let field = match form.next_field().await {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => {
                return Err(ServiceError::PayloadTooLarge { limit: MAX_UPLOAD_BYTES })
            }
            Err(e) => return Err(ServiceError::BadRequest(e.body_text())),
        };
        let name = field.name().unwrap_or_default().to_string();
        let bytes = match field.bytes().await {
            Ok(b) => b,
            Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => {
                return Err(ServiceError::PayloadTooLarge { limit: MAX_UPLOAD_BYTES })
            }
            Err(e) => return Err(ServiceError::BadRequest(e.body_text())),
        };
        let text = || String::from_utf8_lossy(&bytes).trim().to_string();
        match name.as_str() {
            "file" => {
                if bytes.len() > MAX_UPLOAD_BYTES {
                    return Err(ServiceError::PayloadTooLarge { limit: MAX_UPLOAD_BYTES });
                }
                file = Some(bytes);
            }
            "delimiter" => opts.delimiter = text().parse::<Delimiter>()?,
            "has_header" => {
                opts.has_header = match text().to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" | "" => false,
                    other => return Err(ServiceError::BadRequest(format!("has_header must be a boolean, got {other:?}"))),
                }
            }
            other => return Err(ServiceError::BadRequest(format!("unexpected form field {other:?}"))),
        }
    }
    let file = file.ok_or_else(|| ServiceError::BadRequest("missing form field \"file\"".into()))?;
    let table = state.compute(move || Table::parse(&file, opts)).await?;
    let info = dataset_info(String::new(), &table);
    let id = state.insert_dataset(table);
    Ok((StatusCode::CREATED, Json(DatasetInfo { dataset_id: id, ..info })))
}

pub async fn get_dataset(State(state): State<Shared>, Path(id): Path<String>) -> Reply<DatasetInfo> {
    let t = state.dataset(&id)?;
    Ok(Json(dataset_info(id, &t)))
}

fn matrix_of(state: &Shared, id: &str) -> Result<DataMatrix, ServiceError> {
    Ok(state.dataset(id)?.to_matrix()?)
}

fn resolve(state: &Shared, d: &DataRef) -> Result<Inputs, ServiceError> {
    let mut inputs = Inputs::default();
    match (&d.dataset_id, &d.points) {
        (Some(_), Some(_)) => return Err(ServiceError::BadRequest("give dataset_id or points, not both".into())),
        (Some(id), None) => {
            let t = state.dataset(id)?;
            match d.labels_col {
                Some(col) => {
                    let (x, g) = t.split_labels(col)?;
                    inputs.x = Some(x);
                    inputs.labels = Some(g);
                }
                None => inputs.x = Some(t.to_matrix()?),
            }
        }
        (None, Some(rows)) => inputs.x = Some(DataMatrix::from_rows(rows).map_err(ApiError::from)?),
        (None, None) => {}
    }
    if d.labels_col.is_some() && d.dataset_id.is_none() {
        return Err(ServiceError::BadRequest("labels_col needs dataset_id".into()));
    }
    if let Some(l) = &d.labels {
        if inputs.labels.is_some() {
            return Err(ServiceError::BadRequest("give labels_col or labels, not both".into()));
        }
        inputs.labels = Some(GroupLabels::new(l.clone()).map_err(ApiError::from)?);
    }
    if let Some(id) = &d.y_dataset_id {
        inputs.y = Some(matrix_of(state, id)?);
    }
    Ok(inputs)
}

async fn sync_op(state: Shared, data: DataRef, seed: Option<u64>, op: Operation) -> Reply<Envelope> {
    let inputs = resolve(&state, &data)?;
    let seed = seed.unwrap_or(DEFAULT_SEED);
    Ok(Json(state.compute(move || run(&op, &inputs, seed, None)).await?))
}

macro_rules! sync_route {
    ($name:ident, $req:ty, $variant:ident) => {
        pub async fn $name(
            State(state): State<Shared>,
            b: Result<Json<ServiceRequest<$req>>, JsonRejection>,
        ) -> Reply<Envelope> {
            let r = body(b)?;
            sync_op(state, r.data, r.seed, Operation::$variant(r.params)).await
        }
    };
}

sync_route!(normality, NormalityRequest, NormalTest);
sync_route!(twosample, SampleTestRequest, TwosampleTest);
sync_route!(ksample, SampleTestRequest, KsampleTest);
sync_route!(uniformity, UniformityRequest, UniformityTest);
sync_route!(pkbd_sample, PkbdSampleRequest, PkbdSample);
sync_route!(pkbd_density, PkbdDensityRequest, PkbdDensity);

pub async fn select_h(
    State(state): State<Shared>,
    b: Result<Json<ServiceRequest<SelectHRequest>>, JsonRejection>,
) -> Result<(StatusCode, Json<JobRecord>), ServiceError> {
    let r = body(b)?;
    let inputs = resolve(&state, &r.data)?;
    let seed = r.seed.unwrap_or(DEFAULT_SEED);
    let op = Operation::SelectH(r.params);
    let record = state.submit(
        op.name(),
        Box::new(move |cancel| Ok((run(&op, &inputs, seed, Some(cancel))?, None))),
    );
    Ok((StatusCode::ACCEPTED, Json(record)))
}

pub async fn clustering_run(
    State(state): State<Shared>,
    b: Result<Json<ServiceRequest<ClusterRequest>>, JsonRejection>,
) -> Result<(StatusCode, Json<JobRecord>), ServiceError> {
    let r = body(b)?;
    let inputs = resolve(&state, &r.data)?;
    let seed = r.seed.unwrap_or(DEFAULT_SEED);
    let normalize = r.params.normalize;
    let op = Operation::Cluster(r.params);
    let record = state.submit(
        op.name(),
        Box::new(move |cancel| {
            let env = run(&op, &inputs, seed, Some(cancel))?;
            let Output::Clustering(c) = &env.result else { unreachable!("cluster returns a clustering result") };
            let x = inputs.x.expect("checked by run");
            let x = if normalize { x.l2_normalized()? } else { x };
            let fit = FitRecord { x, labels: inputs.labels, fits: c.fits.clone() };
            Ok((env, Some(fit)))
        }),
    );
    Ok((StatusCode::ACCEPTED, Json(record)))
}

/// k-sample test of the partition induced by a stored fit, on the rows
/// the fit was computed from.
pub async fn ksample_check(
    State(state): State<Shared>,
    b: Result<Json<KsampleCheckRequest>, JsonRejection>,
) -> Reply<Envelope> {
    let r = body(b)?;
    let rec = state.fit(&r.fit_id)?;
    let fit = rec
        .fits
        .iter()
        .find(|f| f.k == r.k)
        .ok_or_else(|| ServiceError::NotFound(format!("fit {} has no k = {}", r.fit_id, r.k)))?;
    let labels = GroupLabels::new(fit.final_memberships.iter().map(|&m| m as i64).collect()).map_err(ApiError::from)?;
    let inputs = Inputs { x: Some(rec.x.clone()), labels: Some(labels), ..Inputs::default() };
    let seed = r.seed.unwrap_or(DEFAULT_SEED);
    let op = Operation::KsampleTest(r.test);
    Ok(Json(state.compute(move || run(&op, &inputs, seed, None)).await?))
}

pub async fn get_job(State(state): State<Shared>, Path(id): Path<String>) -> Reply<JobRecord> {
    Ok(Json(state.job(&id)?))
}

pub async fn cancel_job(State(state): State<Shared>, Path(id): Path<String>) -> Reply<JobRecord> {
    Ok(Json(state.cancel(&id)?))
}
