//! HTTP/JSON service over a yeargraph dataset registry.
//!
//! All routes live under `/api`; see [`routes::api_routes`]. Layout runs on
//! the server in per-client sessions that expire after a period of inactivity.

pub mod dataset;
pub mod error;
pub mod json;
pub mod payload;
pub mod routes;
pub mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::Router;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

pub use dataset::{Dataset, DatasetError, Registry};
pub use error::ApiError;
pub use session::{Clock, ManualClock, SessionStore, SystemClock, DEFAULT_TTL};

#[derive(Debug, Clone)]
pub struct AppState {
    pub datasets: Arc<Registry>,
    pub sessions: Arc<SessionStore>,
}

impl AppState {
    pub fn new(datasets: Registry, ttl: Duration, clock: Arc<dyn Clock>) -> Self {
        AppState {
            datasets: Arc::new(datasets),
            sessions: Arc::new(SessionStore::new(ttl, clock)),
        }
    }

    /// Default TTL and the system clock.
    pub fn with_datasets(datasets: Registry) -> Self {
        Self::new(datasets, DEFAULT_TTL, Arc::new(SystemClock::default()))
    }
}

/// The full application. Paths outside `/api` are served from `static_dir`
/// when given, and are otherwise 404.
pub fn app(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let router = Router::new().nest("/api", routes::api_routes());
    let router = match static_dir {
        Some(dir) => router.fallback_service(ServeDir::new(dir)),
        None => router.fallback(routes::unknown_route),
    };
    router.layer(TraceLayer::new_for_http()).with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub listen: SocketAddr,
    pub session_ttl: Duration,
    pub static_dir: Option<PathBuf>,
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServerConfig, datasets: Registry) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    serve_on(listener, config, datasets).await
}

/// Serves on an already bound listener until Ctrl-C. `config.listen` is ignored.
pub async fn serve_on(
    listener: tokio::net::TcpListener,
    config: ServerConfig,
    datasets: Registry,
) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, datasets = datasets.len(), "listening");
    let state = AppState::new(datasets, config.session_ttl, Arc::new(SystemClock::default()));
    axum::serve(listener, app(state, config.static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
