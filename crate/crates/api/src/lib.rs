//! HTTP service over a scenario store.
//!
//! Read-only views serve the latest completed run of each scenario; expert
//! users derive new scenarios with `POST /scenarios/{id}/runs`, which are
//! simulated one at a time in submission order.

pub mod error;
pub mod queries;
pub mod runs;
pub mod scenarios;
mod state;

use std::net::SocketAddr;

use axum::routing::{get, post};
use axum::Router;

pub use error::{ApiError, ApiResult};
pub use runs::{DampingOverride, RunRequest};
pub use state::AppState;

/// Environment variable holding the listen address.
pub const BIND_ENV: &str = "ESID_BIND";
/// Environment variable holding the store directory.
pub const STORE_ENV: &str = "ESID_STORE";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/scenarios", get(scenarios::list))
        .route("/scenarios/{id}", get(scenarios::detail))
        .route("/scenarios/{id}/map", get(queries::map))
        .route("/scenarios/{id}/card", get(queries::card))
        .route("/scenarios/{id}/runs", post(runs::trigger))
        .route("/chart", get(queries::chart))
        .route("/runs/{id}/status", get(runs::status))
        .route("/casedata/{district}", get(queries::case_data))
        .route("/districts/search", get(queries::search))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
