//! HTTP service: `GET /healthz`, `POST /retrieve`, `POST /answer`.
//!
//! The index loads in the background; until it is ready the pipeline
//! endpoints answer 503.

use std::net::SocketAddr;
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Config;
use crate::engine::{AnswerRecord, CliError, Engine, RetrieveRecord};

#[derive(Clone, Default)]
pub struct AppState {
    engine: Arc<OnceLock<Result<Arc<Engine>, String>>>,
}

impl AppState {
    pub fn loading() -> Self {
        Self::default()
    }

    pub fn ready(engine: Engine) -> Self {
        let s = Self::default();
        s.set(Ok(engine));
        s
    }

    /// Only the first call has an effect.
    pub fn set(&self, engine: Result<Engine, String>) {
        let _ = self.engine.set(engine.map(Arc::new));
    }

    pub fn is_ready(&self) -> bool {
        matches!(self.engine.get(), Some(Ok(_)))
    }

    fn engine(&self) -> Result<Arc<Engine>, ApiError> {
        match self.engine.get() {
            None => Err(ApiError(StatusCode::SERVICE_UNAVAILABLE, "index is still loading".into())),
            Some(Err(e)) => Err(ApiError(StatusCode::SERVICE_UNAVAILABLE, format!("index failed to load: {e}"))),
            Some(Ok(e)) => Ok(e.clone()),
        }
    }
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Config(_) | CliError::Input(_) => StatusCode::BAD_REQUEST,
            CliError::Remote(_) => StatusCode::BAD_GATEWAY,
            CliError::Validation(_) | CliError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

#[derive(Deserialize)]
struct RetrieveRequest {
    query: String,
    k: Option<usize>,
}

#[derive(Deserialize)]
struct AnswerRequest {
    query: String,
}

fn parse<T: DeserializeOwned>(headers: &HeaderMap, body: &Bytes) -> Result<T, ApiError> {
    let ctype = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    if !ctype.trim_start().to_ascii_lowercase().starts_with("application/json") {
        return Err(ApiError(StatusCode::UNSUPPORTED_MEDIA_TYPE, "expected Content-Type: application/json".into()));
    }
    serde_json::from_slice(body).map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, CliError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

async fn healthz() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Serialize)]
struct RetrieveResponse {
    results: Vec<RetrieveRecord>,
}

async fn retrieve(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Result<Json<RetrieveResponse>, ApiError> {
    let req: RetrieveRequest = parse(&headers, &body)?;
    if req.k == Some(0) {
        return Err(ApiError(StatusCode::BAD_REQUEST, "k must be at least 1".into()));
    }
    let engine = state.engine()?;
    let out = blocking(move || engine.retrieve(&req.query, req.k)).await?;
    Ok(Json(RetrieveResponse { results: out.value }))
}

async fn answer(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Result<Json<AnswerRecord>, ApiError> {
    let req: AnswerRequest = parse(&headers, &body)?;
    let engine = state.engine()?;
    let out = blocking(move || engine.answer(&req.query)).await?;
    Ok(Json(out.value))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/retrieve", post(retrieve))
        .route("/answer", post(answer))
        .with_state(state)
}

/// Binds `addr`, starts loading the index and serves until the process ends.
pub async fn serve(cfg: Config, addr: SocketAddr) -> std::io::Result<()> {
    let state = AppState::loading();
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || {
        let result = Engine::from_config(&cfg).map_err(|e| e.to_string());
        match &result {
            Ok(e) => eprintln!("index ready: {} documents, {} chunks", e.corpus().num_docs(), e.corpus().num_chunks()),
            Err(e) => eprintln!("index failed to load: {e}"),
        }
        loader.set(result);
    });
    axum::serve(listener, router(state)).await
}
