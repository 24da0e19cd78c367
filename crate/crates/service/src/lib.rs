//! HTTP facade over the quadratik library.
//!
//! Tests and sampling answer synchronously; bandwidth selection and
//! clustering run as jobs polled through `/v1/jobs/{id}`. All compute runs
//! on blocking threads behind one semaphore, so concurrent requests queue
//! rather than oversubscribe the CPU.

mod error;
mod openapi;
mod routes;
mod state;

use std::time::Duration;

use axum::extract::DefaultBodyLimit;
use axum::http::HeaderValue;
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::trace::TraceLayer;

pub use error::ServiceError;
pub use state::{AppState, FitRecord, Shared};

/// Room for multipart framing and the small form fields around the file.
const FORM_OVERHEAD: usize = 64 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    /// Compute tasks allowed to run at once.
    pub max_concurrent: usize,
    /// Idle lifetime of datasets, fits and jobs.
    pub ttl: Duration,
    /// Allowed browser origin; any origin when `None`.
    pub cors_origin: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_concurrent: std::thread::available_parallelism().map_or(1, |n| n.get()),
            ttl: Duration::from_secs(3600),
            cors_origin: None,
        }
    }
}

pub fn router(state: Shared, cors_origin: Option<&str>) -> Router {
    let cors = match cors_origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => CorsLayer::new().allow_origin(AllowOrigin::exact(o)),
        None => CorsLayer::new().allow_origin(AllowOrigin::any()),
    }
    .allow_methods(tower_http::cors::Any)
    .allow_headers(tower_http::cors::Any);
    Router::new()
        .route("/v1/health", get(routes::health))
        .route("/v1/openapi.json", get(routes::openapi))
        .route("/v1/data", post(routes::upload))
        .route("/v1/data/{id}", get(routes::get_dataset))
        .route("/v1/tests/normality", post(routes::normality))
        .route("/v1/tests/twosample", post(routes::twosample))
        .route("/v1/tests/ksample", post(routes::ksample))
        .route("/v1/tests/uniformity", post(routes::uniformity))
        .route("/v1/tuning/select-h", post(routes::select_h))
        .route("/v1/jobs/{id}", get(routes::get_job).delete(routes::cancel_job))
        .route("/v1/pkbd/sample", post(routes::pkbd_sample))
        .route("/v1/pkbd/density", post(routes::pkbd_density))
        .route("/v1/clustering/run", post(routes::clustering_run))
        .route("/v1/clustering/ksample-check", post(routes::ksample_check))
        .layer(DefaultBodyLimit::max(quadratik_api::http::MAX_UPLOAD_BYTES + FORM_OVERHEAD))
        .layer(cors)
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

/// Build the state and router, and start the eviction sweep.
pub fn app(config: &Config) -> Router {
    let state = AppState::new(config.max_concurrent, config.ttl);
    let sweeper = std::sync::Arc::downgrade(&state);
    let period = (config.ttl / 4).clamp(Duration::from_secs(1), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            match sweeper.upgrade() {
                Some(s) => s.evict_expired(),
                None => break,
            }
        }
    });
    router(state, config.cors_origin.as_deref())
}

/// Serve until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    config: &Config,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app(config)).with_graceful_shutdown(shutdown).await
}
