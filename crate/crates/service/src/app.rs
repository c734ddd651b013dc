use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::Value;
use tokio::sync::{Mutex, RwLock};

use crate::api::{CreateSessionRequest, StepRequest};
use crate::error::ApiError;
use crate::session::{Limits, Session};

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

#[derive(Clone)]
struct Stored {
    fingerprint: String,
    status: StatusCode,
    body: Value,
}

impl IntoResponse for Stored {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

struct Entry {
    session: Session,
    replies: HashMap<String, Stored>,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Entry>>>>>,
    created: Arc<Mutex<HashMap<String, Stored>>>,
    limits: Limits,
}

impl Default for AppState {
    fn default() -> Self {
        Self::new(Limits::default())
    }
}

impl AppState {
    pub fn new(limits: Limits) -> Self {
        AppState {
            sessions: Arc::default(),
            created: Arc::default(),
            limits,
        }
    }

    async fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/deploy", post(deploy))
        .with_state(state)
}

/// Serve on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::default())).await
}

fn idempotency_key(headers: &HeaderMap) -> Result<Option<String>, ApiError> {
    match headers.get(IDEMPOTENCY_HEADER) {
        None => Ok(None),
        Some(v) => {
            let key = v
                .to_str()
                .map_err(|_| ApiError::invalid(Some(IDEMPOTENCY_HEADER), "must be visible ASCII"))?;
            if key.is_empty() || key.len() > 200 {
                return Err(ApiError::invalid(Some(IDEMPOTENCY_HEADER), "must be 1 to 200 characters"));
            }
            Ok(Some(key.to_string()))
        }
    }
}

fn body_value(body: Result<Json<Value>, JsonRejection>) -> Result<Value, ApiError> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::invalid(None, format!("malformed JSON body: {}", e.body_text())))
}

fn parse<T: serde::de::DeserializeOwned>(value: Value, field: Option<&str>) -> Result<T, ApiError> {
    serde_json::from_value(value).map_err(|e| ApiError::invalid(field, e.to_string()))
}

fn stored<T: Serialize>(fingerprint: String, status: StatusCode, body: &T) -> Result<Stored, ApiError> {
    Ok(Stored {
        fingerprint,
        status,
        body: serde_json::to_value(body).map_err(|e| ApiError::internal(e.to_string()))?,
    })
}

fn replayed(previous: &Stored, key: &str, fingerprint: &str) -> Result<Stored, ApiError> {
    if previous.fingerprint == fingerprint {
        Ok(previous.clone())
    } else {
        Err(ApiError::idempotency_conflict(key))
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))
}

async fn healthz() -> Json<Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Result<Json<Value>, JsonRejection>,
) -> Result<Stored, ApiError> {
    let key = idempotency_key(&headers)?;
    let value = body_value(body)?;
    let fingerprint = value.to_string();
    let request: CreateSessionRequest = parse(value, None)?;

    // Holding the key table across creation makes concurrent retries wait
    // for the first attempt instead of creating twice.
    let mut created = match &key {
        Some(k) => {
            let guard = state.created.clone().lock_owned().await;
            if let Some(previous) = guard.get(k) {
                return replayed(previous, k, &fingerprint);
            }
            Some(guard)
        }
        None => None,
    };

    let id = uuid::Uuid::new_v4().simple().to_string();
    let limits = state.limits;
    let session = blocking(move || Session::create(id, request, &limits)).await??;
    let reply = stored(fingerprint, StatusCode::CREATED, &session.descriptor()?)?;
    let id = session.id().to_string();
    state.sessions.write().await.insert(
        id,
        Arc::new(Mutex::new(Entry {
            session,
            replies: HashMap::new(),
        })),
    );
    if let (Some(k), Some(table)) = (key, created.as_mut()) {
        table.insert(k, reply.clone());
    }
    Ok(reply)
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let entry = state.entry(&id).await?;
    let guard = entry.lock().await;
    let view = guard.session.view()?;
    Ok(Json(serde_json::to_value(view).map_err(|e| ApiError::internal(e.to_string()))?))
}

/// Run a mutation under the session lock, replaying a stored reply when the
/// idempotency key has been seen.
async fn mutate<T, F>(
    state: &AppState,
    id: &str,
    key: Option<String>,
    fingerprint: String,
    op: F,
) -> Result<Stored, ApiError>
where
    T: Serialize + Send + 'static,
    F: FnOnce(&mut Session) -> Result<T, ApiError> + Send + 'static,
{
    let entry = state.entry(id).await?;
    let guard = entry.lock_owned().await;
    if let Some(k) = &key {
        if let Some(previous) = guard.replies.get(k) {
            return replayed(previous, k, &fingerprint);
        }
    }
    blocking(move || {
        let mut guard = guard;
        let result = op(&mut guard.session)?;
        let reply = stored(fingerprint, StatusCode::OK, &result)?;
        if let Some(k) = key {
            guard.replies.insert(k, reply.clone());
        }
        Ok(reply)
    })
    .await?
}

async fn step(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<Value>, JsonRejection>,
) -> Result<Stored, ApiError> {
    let key = idempotency_key(&headers)?;
    let request: StepRequest = parse(body_value(body)?, Some("action"))?;
    let fingerprint = format!("step:{}", request.action);
    mutate(&state, &id, key, fingerprint, move |s| s.step(request.action)).await
}

async fn deploy(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Stored, ApiError> {
    let key = idempotency_key(&headers)?;
    mutate(&state, &id, key, "deploy".to_string(), |s| s.deploy()).await
}
