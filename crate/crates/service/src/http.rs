//! JSON-over-HTTP front end. Field names and status codes are listed in
//! `docs/API.md`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use spoofeval_core::trialdata::Task;

use crate::config::PhaseName;
use crate::platform::{Platform, SubmitError};

/// Largest accepted request body. Full evaluation score files run to tens
/// of megabytes.
pub const MAX_BODY_BYTES: usize = 256 * 1024 * 1024;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

pub struct ApiError(StatusCode, &'static str, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.1.into(),
            message: self.2,
        };
        (self.0, Json(body)).into_response()
    }
}

impl From<SubmitError> for ApiError {
    fn from(e: SubmitError) -> Self {
        let (status, code) = match &e {
            SubmitError::Auth => (StatusCode::UNAUTHORIZED, "auth"),
            SubmitError::UnknownTask(_) => (StatusCode::NOT_FOUND, "unknown_task"),
            SubmitError::PhaseClosed(_) => (StatusCode::FORBIDDEN, "phase_closed"),
            SubmitError::QuotaExceeded { .. } => (StatusCode::TOO_MANY_REQUESTS, "quota_exceeded"),
            SubmitError::Parse(_) => (StatusCode::UNPROCESSABLE_ENTITY, "parse_error"),
            SubmitError::Alignment { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "alignment_error"),
            SubmitError::NotFound => (StatusCode::NOT_FOUND, "not_found"),
            SubmitError::Scoring(_) | SubmitError::Store(_) => {
                log::error!("{e}");
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        ApiError(status, code, e.to_string())
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, "bad_request", msg.into())
}

fn parse_task(s: &str) -> Result<Task, ApiError> {
    s.parse().map_err(|()| {
        ApiError(
            StatusCode::NOT_FOUND,
            "unknown_task",
            format!("unknown task {s:?}"),
        )
    })
}

fn bearer(headers: &HeaderMap) -> Option<String> {
    let v = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    v.strip_prefix("Bearer ").map(|t| t.trim().to_owned())
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SubmitError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn submit(
    State(p): State<Arc<Platform>>,
    Path(task): Path<String>,
    headers: HeaderMap,
    mut form: Multipart,
) -> Result<Response, ApiError> {
    let task = parse_task(&task)?;
    let mut token = bearer(&headers);
    let mut scores = None;
    while let Some(field) = form
        .next_field()
        .await
        .map_err(|e| bad_request(e.body_text()))?
    {
        match field.name() {
            Some("token") => {
                token = Some(field.text().await.map_err(|e| bad_request(e.body_text()))?)
            }
            Some("scores") => {
                scores = Some(
                    field
                        .bytes()
                        .await
                        .map_err(|e| bad_request(e.body_text()))?,
                )
            }
            _ => {}
        }
    }
    let token = token.ok_or(SubmitError::Auth)?;
    let scores = scores.ok_or_else(|| bad_request("missing multipart field \"scores\""))?;
    let rec = blocking(move || p.submit(&token, task, &scores)).await?;
    Ok((StatusCode::CREATED, Json(rec)).into_response())
}

#[derive(Debug, Deserialize)]
struct PhaseQuery {
    phase: Option<String>,
}

impl PhaseQuery {
    fn phase(&self) -> Result<PhaseName, ApiError> {
        self.phase
            .as_deref()
            .map_or(Ok(PhaseName::Progress), |s| s.parse().map_err(bad_request))
    }
}

async fn leaderboard(
    State(p): State<Arc<Platform>>,
    Path(task): Path<String>,
    Query(q): Query<PhaseQuery>,
) -> Result<Response, ApiError> {
    let (task, phase) = (parse_task(&task)?, q.phase()?);
    Ok(Json(p.leaderboard(task, phase)).into_response())
}

async fn progress_series(
    State(p): State<Arc<Platform>>,
    Path(task): Path<String>,
    Query(q): Query<PhaseQuery>,
) -> Result<Response, ApiError> {
    let (task, phase) = (parse_task(&task)?, q.phase()?);
    Ok(Json(p.best_over_time(task, phase)).into_response())
}

async fn submission(
    State(p): State<Arc<Platform>>,
    Path((task, id)): Path<(String, String)>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let task = parse_task(&task)?;
    let token = bearer(&headers).ok_or(SubmitError::Auth)?;
    let id: u64 = id.parse().map_err(|_| SubmitError::NotFound)?;
    let rec = p.get_submission(&token, id)?;
    if rec.task != task {
        return Err(SubmitError::NotFound.into());
    }
    Ok(Json(rec).into_response())
}

pub fn router(platform: Arc<Platform>) -> Router {
    Router::new()
        .route("/api/v1/{task}/submissions", post(submit))
        .route("/api/v1/{task}/submissions/{id}", get(submission))
        .route("/api/v1/{task}/leaderboard", get(leaderboard))
        .route("/api/v1/{task}/progress-series", get(progress_series))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(platform)
}

/// Serves until Ctrl-C.
pub async fn serve(platform: Arc<Platform>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(platform))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
