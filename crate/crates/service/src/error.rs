use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use quadratik_api::http::ErrorBody;
use quadratik_api::ApiError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Api(#[from] ApiError),
    #[error("{0} not found")]
    NotFound(String),
    #[error("upload exceeds {limit} bytes")]
    PayloadTooLarge { limit: usize },
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::Api(ApiError::Parse { .. } | ApiError::Compute(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::Api(ApiError::InvalidParameter(_)) | Self::BadRequest(_) => StatusCode::BAD_REQUEST,
            Self::Api(ApiError::Cancelled) | Self::Conflict(_) => StatusCode::CONFLICT,
            Self::NotFound(_) => StatusCode::NOT_FOUND,
            Self::PayloadTooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        match self {
            Self::Api(e) => ErrorBody::from(e),
            Self::PayloadTooLarge { limit } => ErrorBody {
                code: "payload_too_large".into(),
                message: self.to_string(),
                detail: Some(serde_json::json!({ "limit_bytes": limit })),
            },
            other => {
                let code = match other {
                    Self::NotFound(_) => "not_found",
                    Self::BadRequest(_) => "invalid_parameter",
                    Self::Conflict(_) => "conflict",
                    _ => "internal",
                };
                ErrorBody { code: code.into(), message: other.to_string(), detail: None }
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if self.status().is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        (self.status(), Json(self.body())).into_response()
    }
}
