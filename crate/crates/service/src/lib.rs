//! HTTP service and command-line front end for the vizassist engine.

pub mod api;
pub mod error;
pub mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use vizassist_core::mdp::MdpModel;

pub use api::{router, AppState, DEFAULT_MAX_UPLOAD};
pub use error::ServiceError;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// Where the model is written on shutdown and every `persist_every`.
    pub model_path: Option<PathBuf>,
    /// Directory for per-session JSON-lines event logs.
    pub event_dir: Option<PathBuf>,
    pub max_upload: usize,
    pub persist_every: Option<Duration>,
}

fn persist(state: &AppState, path: &std::path::Path) -> std::io::Result<()> {
    let bytes = state.model.lock().expect("model lock").persist();
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}

/// Serve the API until ctrl-c, then persist the model.
pub async fn run(config: ServiceConfig, model: MdpModel) -> std::io::Result<()> {
    if let Some(dir) = &config.event_dir {
        std::fs::create_dir_all(dir)?;
    }
    let state = Arc::new(AppState::new(
        model,
        config.max_upload,
        config.event_dir.clone(),
    ));
    if let (Some(path), Some(every)) = (config.model_path.clone(), config.persist_every) {
        let st = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            tick.tick().await;
            loop {
                tick.tick().await;
                if let Err(e) = persist(&st, &path) {
                    eprintln!("model persist failed: {e}");
                }
            }
        });
    }
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some(path) = &config.model_path {
        persist(&state, path)?;
    }
    Ok(())
}
