//! OpenAPI description of the v1 routes. Parameter defaults are taken
//! from the request types themselves so they cannot drift.

use quadratik_api::request::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

/// Defaults of `T`: decode a minimal body, re-encode, drop the required keys.
fn defaults<T: DeserializeOwned + Serialize>(minimal: Value) -> Value {
    let required: Vec<String> = minimal.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
    let full: T = serde_json::from_value(minimal).expect("minimal request decodes");
    let mut v = serde_json::to_value(full).expect("request encodes");
    if let Some(o) = v.as_object_mut() {
        for k in &required {
            o.remove(k);
        }
    }
    v
}

fn job_route(summary: &str, operation: &str, defaults: Value) -> Value {
    json!({ "post": {
        "summary": summary,
        "x-operation": operation,
        "x-defaults": defaults,
        "requestBody": { "required": true, "content": { "application/json": { "schema": { "$ref": "#/components/schemas/ServiceRequest" } } } },
        "responses": {
            "202": { "description": "job queued", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/JobRecord" } } } },
            "400": { "$ref": "#/components/responses/Error" },
            "404": { "$ref": "#/components/responses/Error" }
        }
    }})
}

fn sync_route(summary: &str, operation: &str, defaults: Value) -> Value {
    json!({ "post": {
        "summary": summary,
        "x-operation": operation,
        "x-defaults": defaults,
        "requestBody": { "required": true, "content": { "application/json": { "schema": { "$ref": "#/components/schemas/ServiceRequest" } } } },
        "responses": {
            "200": { "description": "result envelope", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Envelope" } } } },
            "400": { "$ref": "#/components/responses/Error" },
            "404": { "$ref": "#/components/responses/Error" },
            "422": { "$ref": "#/components/responses/Error" }
        }
    }})
}

pub fn document() -> Value {
    let normality = defaults::<NormalityRequest>(json!({ "h": 1.0 }));
    let sample = defaults::<SampleTestRequest>(json!({ "h": 1.0 }));
    let uniformity = defaults::<UniformityRequest>(json!({ "rho": 0.5 }));
    let select_h = defaults::<SelectHRequest>(json!({ "alternative": "location" }));
    let pkbd_sample = defaults::<PkbdSampleRequest>(json!({ "n": 1, "rho": 0.5, "mu": [1.0, 0.0] }));
    let cluster = defaults::<ClusterRequest>(json!({}));
    json!({
        "openapi": "3.0.3",
        "info": { "title": "quadratik", "version": quadratik_api::SCHEMA_VERSION },
        "paths": {
            "/v1/health": { "get": { "summary": "liveness", "responses": { "200": { "description": "ok" } } } },
            "/v1/openapi.json": { "get": { "summary": "this document", "responses": { "200": { "description": "ok" } } } },
            "/v1/data": { "post": {
                "summary": "upload a numeric CSV table",
                "requestBody": { "required": true, "content": { "multipart/form-data": { "schema": {
                    "type": "object",
                    "required": ["file"],
                    "properties": {
                        "file": { "type": "string", "format": "binary", "maxLength": quadratik_api::http::MAX_UPLOAD_BYTES },
                        "delimiter": { "type": "string", "default": "comma", "description": "comma, tab, semicolon, space, pipe or a single character" },
                        "has_header": { "type": "boolean", "default": false }
                    }
                } } } },
                "responses": {
                    "201": { "description": "dataset stored", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/DatasetInfo" } } } },
                    "400": { "$ref": "#/components/responses/Error" },
                    "413": { "$ref": "#/components/responses/Error" },
                    "422": { "$ref": "#/components/responses/Error" }
                }
            } },
            "/v1/data/{id}": { "get": {
                "summary": "dataset metadata and column summary",
                "parameters": [{ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }],
                "responses": { "200": { "description": "ok" }, "404": { "$ref": "#/components/responses/Error" } }
            } },
            "/v1/tests/normality": sync_route("normality test", "normal-test", normality),
            "/v1/tests/twosample": sync_route("two-sample test", "twosample-test", sample.clone()),
            "/v1/tests/ksample": sync_route("k-sample test", "ksample-test", sample.clone()),
            "/v1/tests/uniformity": sync_route("uniformity test on the sphere", "uniformity-test", uniformity),
            "/v1/tuning/select-h": job_route("bandwidth selection", "select-h", select_h),
            "/v1/jobs/{id}": {
                "get": {
                    "summary": "job status and result",
                    "parameters": [{ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }],
                    "responses": { "200": { "description": "ok", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/JobRecord" } } } }, "404": { "$ref": "#/components/responses/Error" } }
                },
                "delete": {
                    "summary": "cancel a queued or running job",
                    "parameters": [{ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }],
                    "responses": { "200": { "description": "cancelled" }, "404": { "$ref": "#/components/responses/Error" }, "409": { "$ref": "#/components/responses/Error" } }
                }
            },
            "/v1/pkbd/sample": sync_route("draw from a Poisson kernel-based distribution", "pkbd-sample", pkbd_sample),
            "/v1/pkbd/density": sync_route("Poisson kernel-based density at given rows", "pkbd-density", json!({})),
            "/v1/clustering/run": job_route("fit Poisson kernel-based mixtures", "cluster", cluster),
            "/v1/clustering/ksample-check": sync_route("k-sample test on the clusters of a stored fit", "ksample-test", sample)
        },
        "components": {
            "responses": {
                "Error": { "description": "error", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Error" } } } }
            },
            "schemas": {
                "Error": {
                    "type": "object",
                    "required": ["code", "message"],
                    "properties": {
                        "code": { "type": "string", "enum": ["parse_error", "invalid_parameter", "computation_error", "cancelled", "not_found", "payload_too_large", "conflict", "internal"] },
                        "message": { "type": "string" },
                        "detail": { "nullable": true }
                    }
                },
                "ServiceRequest": {
                    "type": "object",
                    "description": "Data reference and seed plus the operation parameters at the top level; see x-defaults on each route.",
                    "properties": {
                        "dataset_id": { "type": "string" },
                        "labels_col": { "type": "integer", "minimum": 1, "description": "1-based label column of the dataset" },
                        "labels": { "type": "array", "items": { "type": "integer" } },
                        "y_dataset_id": { "type": "string" },
                        "points": { "type": "array", "items": { "type": "array", "items": { "type": "number" } } },
                        "seed": { "type": "integer", "minimum": 0 },
                        "fit_id": { "type": "string", "description": "ksample-check only" },
                        "k": { "description": "ksample-check: one cluster count; clustering: a list" }
                    },
                    "additionalProperties": true
                },
                "DatasetInfo": {
                    "type": "object",
                    "properties": {
                        "dataset_id": { "type": "string" },
                        "rows": { "type": "integer" },
                        "columns": { "type": "integer" },
                        "header": { "type": "array", "items": { "type": "string" }, "nullable": true },
                        "column_summary": { "type": "array", "items": { "type": "object" } }
                    }
                },
                "Envelope": {
                    "type": "object",
                    "required": ["schema_version", "seed", "request", "result"],
                    "properties": {
                        "schema_version": { "type": "string" },
                        "seed": { "type": "integer" },
                        "request": { "type": "object", "description": "the operation name and its full parameters" },
                        "result": { "type": "object" }
                    }
                },
                "JobRecord": {
                    "type": "object",
                    "properties": {
                        "job_id": { "type": "string" },
                        "kind": { "type": "string" },
                        "status": { "type": "string", "enum": ["queued", "running", "done", "failed", "cancelled"] },
                        "result": { "$ref": "#/components/schemas/Envelope" },
                        "error": { "$ref": "#/components/schemas/Error" },
                        "fit_id": { "type": "string", "nullable": true }
                    }
                }
            }
        }
    })
}
