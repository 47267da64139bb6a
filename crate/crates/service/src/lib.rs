//! HTTP JSON API over the envelope library.
//!
//! Datasets are uploaded once and addressed by a content-derived id. Fits are
//! cached per dataset by (library version, method, alpha), so repeated
//! queries return identical bodies.

mod api;
mod error;
mod state;
mod upload;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;

pub use api::{BoundResponse, Created, DatasetSummary, M0Response, SelectResponse};
pub use error::{ApiError, ApiResult};
pub use state::{AppState, Dataset, ServiceConfig, DEFAULT_MAX_M};
pub use upload::parse_family;

/// Largest accepted request body.
pub const MAX_BODY_BYTES: usize = 256 * 1024 * 1024;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/methods", get(api::methods))
        .route("/datasets", post(api::create_dataset))
        .route("/datasets/{id}", get(api::get_dataset))
        .route("/datasets/{id}/envelope", get(api::envelope))
        .route("/datasets/{id}/m0", get(api::m0))
        .route("/datasets/{id}/bound", post(api::bound))
        .route("/datasets/{id}/select", get(api::select))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
