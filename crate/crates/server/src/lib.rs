//! HTTP/JSON service over a loaded tweetscape scene.

pub mod api;
pub mod config;
pub mod snapshot;

use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use api::{router, AppState};
pub use config::ServiceConfig;
pub use snapshot::{build_snapshot, Snapshot, SnapshotStore};

/// Startup failure, tagged with the stage that failed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct BootError {
    pub stage: &'static str,
    pub message: String,
}

impl BootError {
    pub fn new(stage: &'static str, message: impl Into<String>) -> Self {
        BootError {
            stage,
            message: message.into(),
        }
    }
}

/// A server bound to a socket and serving in the background.
pub struct RunningService {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    shutdown: Option<oneshot::Sender<()>>,
    handle: JoinHandle<std::io::Result<()>>,
}

impl RunningService {
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.handle.await.map_err(std::io::Error::other)?
    }

    /// Serves until the process receives ctrl-c or SIGTERM.
    pub async fn run_until_signal(self) -> std::io::Result<()> {
        #[cfg(unix)]
        {
            let mut term = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())?;
            tokio::select! {
                _ = tokio::signal::ctrl_c() => {}
                _ = term.recv() => {}
            }
        }
        #[cfg(not(unix))]
        let _ = tokio::signal::ctrl_c().await;
        tracing::info!("shutting down");
        self.shutdown().await
    }
}

/// Loads the snapshot, binds `config.listen` and starts serving.
pub async fn boot(config: ServiceConfig) -> Result<RunningService, BootError> {
    let build_config = config.clone();
    let snapshot = tokio::task::spawn_blocking(move || build_snapshot(&build_config))
        .await
        .map_err(|e| BootError::new("startup", e.to_string()))??;
    tracing::info!(
        records = snapshot.dataset.len(),
        skipped = snapshot.dataset.skipped,
        out_of_bounds = snapshot.dataset.out_of_bounds,
        chunks = snapshot.terrain_chunks.len(),
        "snapshot loaded"
    );

    let listener = TcpListener::bind(config.listen)
        .await
        .map_err(|e| BootError::new("bind", format!("{}: {e}", config.listen)))?;
    let addr = listener
        .local_addr()
        .map_err(|e| BootError::new("bind", e.to_string()))?;
    let state = AppState::new(config, snapshot);
    let app = router(Arc::clone(&state));

    let (tx, rx) = oneshot::channel();
    let handle = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%addr, "listening");
    Ok(RunningService {
        addr,
        state,
        shutdown: Some(tx),
        handle,
    })
}
