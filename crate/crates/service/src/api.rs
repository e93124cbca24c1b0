use crate::state::{AppState, Rejection};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use psyscale::mlds::Choice;
use serde::Deserialize;
use serde_json::json;
use std::sync::Arc;

type Shared = Arc<AppState>;

impl IntoResponse for Rejection {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            Rejection::NotFound => (StatusCode::NOT_FOUND, "unknown session".to_string()),
            Rejection::Gone => (StatusCode::GONE, "session complete".to_string()),
            Rejection::Conflict { expected } => (
                StatusCode::CONFLICT,
                format!("stale or duplicate trial; current trial is {expected}"),
            ),
            Rejection::Unavailable(m) => (StatusCode::SERVICE_UNAVAILABLE, m),
            Rejection::Internal(m) => {
                tracing::error!(error = %m, "request failed");
                (StatusCode::INTERNAL_SERVER_ERROR, m)
            }
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

fn bad_request(message: impl Into<String>) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": message.into() }))).into_response()
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct StartBody {
    participant_hint: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseBody {
    trial_id: usize,
    choice: Choice,
}

async fn start_session(State(state): State<Shared>, body: Bytes) -> Response {
    let parsed: StartBody = if body.iter().all(u8::is_ascii_whitespace) {
        StartBody::default()
    } else {
        match serde_json::from_slice(&body) {
            Ok(b) => b,
            Err(e) => return bad_request(e.to_string()),
        }
    };
    match state.start_session(parsed.participant_hint) {
        Ok(s) => (StatusCode::CREATED, Json(s)).into_response(),
        Err(r) => r.into_response(),
    }
}

async fn next_trial(State(state): State<Shared>, Path(token): Path<String>) -> Response {
    match state.next_trial(&token).await {
        Ok(t) => Json(t).into_response(),
        Err(r) => r.into_response(),
    }
}

async fn post_response(
    State(state): State<Shared>,
    Path(token): Path<String>,
    body: Bytes,
) -> Response {
    if state.session(&token).is_none() {
        return Rejection::NotFound.into_response();
    }
    let parsed: ResponseBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return bad_request(e.to_string()),
    };
    match state.post_response(&token, parsed.trial_id, parsed.choice).await {
        Ok(ack) => Json(ack).into_response(),
        Err(r) => r.into_response(),
    }
}

async fn progress(State(state): State<Shared>, Path(token): Path<String>) -> Response {
    let Some(session) = state.session(&token) else {
        return Rejection::NotFound.into_response();
    };
    let s = session.lock().await;
    Json(json!({
        "token": s.token,
        "cursor": s.cursor,
        "limit": s.limit,
        "complete": s.complete(),
    }))
    .into_response()
}

async fn healthz(State(state): State<Shared>) -> Response {
    Json(json!({ "status": "ok", "sequences": state.n_sequences() })).into_response()
}

async fn stimulus(State(state): State<Shared>, Path(file): Path<String>) -> Response {
    let Some(path) = file.strip_suffix(".png").and_then(|h| state.stimulus_path(h)) else {
        return (StatusCode::NOT_FOUND, Json(json!({ "error": "unknown stimulus" }))).into_response();
    };
    match tokio::fs::read(path).await {
        Ok(bytes) => (
            [
                (header::CONTENT_TYPE, "image/png"),
                (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
            ],
            bytes,
        )
            .into_response(),
        Err(e) => Rejection::Internal(format!("{}: {e}", path.display())).into_response(),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/session", post(start_session))
        .route("/session/{id}/trial", get(next_trial))
        .route("/session/{id}/response", post(post_response))
        .route("/session/{id}/progress", get(progress))
        .route("/healthz", get(healthz))
        .route("/stimuli/{file}", get(stimulus))
        .with_state(state)
}
