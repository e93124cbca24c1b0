//! HTTP service for browser-based 2AFC sessions.
//!
//! Each session is a slice of an endless stream of shuffled trial plans
//! over every sequence in the stimulus directory. Session `n` owns stream
//! positions `[n * S, (n + 1) * S)`, so the trials a token sees depend only
//! on the service seed and the token. Responses are mapped back to
//! canonical pair order and appended to one JSONL file per session.

mod api;
mod config;
mod state;

pub use api::router;
pub use config::{ServiceConfig, CONFIG_ENV};
pub use state::{line_hash, Ack, AppState, Rejection, Session, TrialPayload};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("stimuli: {0}")]
    Stimuli(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Binds the configured address and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let listen = config.listen.clone();
    let state = std::sync::Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(&listen).await?;
    tracing::info!(address = %listener.local_addr()?, sequences = state.n_sequences(), "serving");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
