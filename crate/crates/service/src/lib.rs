//! HTTP API through which coders label refinement samples, settle
//! disagreements, watch consistency and trigger split/merge rounds.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/runs/{run}/sessions` | open the current round's session |
//! | POST | `/runs/{run}/refine` | close the round |
//! | GET | `/sessions/{id}` | samples and progress |
//! | POST | `/sessions/{id}/labels` | one coder label |
//! | GET, POST | `/sessions/{id}/adjudications` | disputes / settle one |
//! | GET | `/sessions/{id}/consistency` | reports and kappa |
//! | GET | `/sessions/{id}/images/{image}/thumbnail` | JPEG, ≤ 256 px |

pub mod api;
pub mod error;
pub mod runs;
pub mod thumbnail;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;

pub use error::ApiError;
pub use runs::{Registry, Run};

pub struct AppState {
    pub registry: Registry,
    pub token: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Directory holding one run directory per run id.
    pub runs_root: PathBuf,
    pub bind: SocketAddr,
    pub token: Option<String>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/runs/{run}/sessions", post(api::create_session))
        .route("/runs/{run}/refine", post(api::refine))
        .route("/sessions/{id}", get(api::get_session))
        .route("/sessions/{id}/labels", post(api::post_label))
        .route("/sessions/{id}/adjudications", get(api::get_adjudications).post(api::post_adjudication))
        .route("/sessions/{id}/consistency", get(api::get_consistency))
        .route("/sessions/{id}/images/{image}/thumbnail", get(api::thumbnail))
        .layer(axum::middleware::from_fn_with_state(state.clone(), api::require_token))
        .with_state(state)
}

pub fn app(runs_root: impl Into<PathBuf>, token: Option<String>) -> Router {
    router(Arc::new(AppState { registry: Registry::new(runs_root), token }))
}

/// Serve until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(config.runs_root, config.token))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
