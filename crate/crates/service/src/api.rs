//! The `/v1` JSON API.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, JsonRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use vizassist_core::dataset::{load_dataset, DataFormat};
use vizassist_core::fitter::AttributeBinding;
use vizassist_core::mdp::MdpModel;
use vizassist_core::templates::{applicability, TemplateLibrary};
use vizassist_core::{InteractionType, VizType};

use crate::error::ServiceError;
use crate::session::{Session, SessionEvent};

pub const DEFAULT_MAX_UPLOAD: usize = 10 * 1024 * 1024;

pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    /// Shared by every session; feedback is applied under this lock.
    pub model: Mutex<MdpModel>,
    next_id: AtomicU64,
    pub max_upload: usize,
    pub event_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(model: MdpModel, max_upload: usize, event_dir: Option<PathBuf>) -> Self {
        AppState {
            sessions: RwLock::new(HashMap::new()),
            model: Mutex::new(model),
            next_id: AtomicU64::new(1),
            max_upload,
            event_dir,
        }
    }

    pub fn create_session(
        &self,
        dataset: Option<vizassist_core::dataset::Dataset>,
    ) -> Arc<Mutex<Session>> {
        let id = format!("s{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let log = self
            .event_dir
            .as_ref()
            .map(|d| d.join(format!("{id}.jsonl")));
        let session = Arc::new(Mutex::new(Session::new(id.clone(), dataset, log)));
        self.sessions
            .write()
            .expect("sessions lock")
            .insert(id, session.clone());
        session
    }

    pub fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::SessionNotFound(id.to_string()))
    }

    fn remove(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .write()
            .expect("sessions lock")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ServiceError::SessionNotFound(id.to_string()))
    }

    /// Run `f` with the session locked.
    fn with<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let s = self.session(id)?;
        let mut guard = s.lock().expect("session lock");
        f(&mut guard)
    }
}

type Shared = Arc<AppState>;
type ApiResult = Result<axum::response::Response, ServiceError>;

fn body<T: DeserializeOwned>(
    state: &AppState,
    b: Result<Json<T>, JsonRejection>,
) -> Result<T, ServiceError> {
    match b {
        Ok(Json(v)) => Ok(v),
        Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => {
            Err(ServiceError::PayloadTooLarge {
                limit: state.max_upload,
            })
        }
        Err(e) => Err(ServiceError::InvalidRequest(e.body_text())),
    }
}

fn ok(v: impl Serialize) -> ApiResult {
    Ok(Json(v).into_response())
}

pub fn router(state: Shared) -> Router {
    let limit = state.max_upload;
    Router::new()
        .route(
            "/v1/health",
            get(|| async { Json(json!({ "status": "ok" })) }),
        )
        .route("/v1/templates", get(list_templates))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session).delete(delete_session))
        .route("/v1/sessions/{id}/template", post(select_template))
        .route("/v1/sessions/{id}/encoding", post(refit))
        .route("/v1/sessions/{id}/recommendations", get(recommendations))
        .route("/v1/sessions/{id}/accept", post(accept))
        .route("/v1/sessions/{id}/undo", post(undo))
        .route("/v1/sessions/{id}/ignore", post(ignore))
        .route("/v1/sessions/{id}/source", get(get_source).put(set_source))
        .route("/v1/sessions/{id}/classify", post(classify))
        .route("/v1/sessions/{id}/export", post(export))
        .route("/v1/sessions/{id}/events", get(events))
        .route("/v1/sessions/{id}/data.csv", get(data_csv))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

async fn not_found() -> impl IntoResponse {
    let body = json!({ "error": { "code": "NotFound", "message": "no such endpoint" } });
    (StatusCode::NOT_FOUND, Json(body))
}

#[derive(Serialize)]
struct TemplateInfo {
    viz: VizType,
    summary: String,
    slots: Vec<vizassist_core::templates::SlotSpec>,
    interactions: Vec<InteractionType>,
}

async fn list_templates() -> ApiResult {
    let lib = TemplateLibrary::builtin();
    let list: Vec<TemplateInfo> = VizType::ALL
        .into_iter()
        .map(|v| {
            let t = lib.viz_template(v);
            TemplateInfo {
                viz: v,
                summary: t.summary.clone(),
                slots: t.slot_signature.clone(),
                interactions: applicability(v),
            }
        })
        .collect();
    ok(json!({ "templates": list }))
}

#[derive(Deserialize)]
struct DatasetUpload {
    name: Option<String>,
    #[serde(default)]
    format: Option<DataFormat>,
    content: String,
}

#[derive(Deserialize, Default)]
struct CreateRequest {
    dataset: Option<DatasetUpload>,
}

#[derive(Deserialize)]
struct NameQuery {
    name: Option<String>,
}

async fn create_session(
    State(state): State<Shared>,
    Query(q): Query<NameQuery>,
    headers: HeaderMap,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let bytes = raw.map_err(|e| {
        if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ServiceError::PayloadTooLarge {
                limit: state.max_upload,
            }
        } else {
            ServiceError::InvalidRequest(e.body_text())
        }
    })?;
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .to_ascii_lowercase();
    let dataset = if content_type.starts_with("text/csv") {
        Some(load_dataset(
            q.name.as_deref().unwrap_or("data.csv"),
            &bytes,
            DataFormat::Csv,
        )?)
    } else {
        let req: CreateRequest = if bytes.iter().all(u8::is_ascii_whitespace) {
            CreateRequest::default()
        } else {
            serde_json::from_slice(&bytes)
                .map_err(|e| ServiceError::InvalidRequest(e.to_string()))?
        };
        match req.dataset {
            Some(up) => {
                let name = up.name.unwrap_or_else(|| "data.csv".into());
                let format = up.format.unwrap_or(if name.ends_with(".json") {
                    DataFormat::Json
                } else {
                    DataFormat::Csv
                });
                Some(load_dataset(&name, up.content.as_bytes(), format)?)
            }
            None => None,
        }
    };
    let session = state.create_session(dataset);
    let view = session.lock().expect("session lock").view();
    Ok((StatusCode::CREATED, Json(json!({ "session": view }))).into_response())
}

async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    ok(json!({ "session": state.with(&id, |s| Ok(s.view()))? }))
}

async fn delete_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    state.remove(&id)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize)]
struct TemplateRequest {
    viz: String,
    #[serde(default)]
    binding: Option<HashMap<String, String>>,
}

fn parse_viz(name: &str) -> Result<VizType, ServiceError> {
    name.parse()
        .map_err(|_| vizassist_core::mdp::MdpError::UnknownVizType(name.to_string()).into())
}

async fn select_template(
    State(state): State<Shared>,
    Path(id): Path<String>,
    b: Result<Json<TemplateRequest>, JsonRejection>,
) -> ApiResult {
    let req = body(&state, b)?;
    let viz = parse_viz(&req.viz)?;
    let binding = req
        .binding
        .map(|m| AttributeBinding::from_pairs(m.iter().map(|(k, v)| (k.as_str(), v.as_str()))));
    let program = state.with(&id, |s| s.select_template(viz, binding))?;
    ok(json!({ "program": program }))
}

#[derive(Deserialize)]
struct EncodingRequest {
    slot: String,
    attribute: String,
}

async fn refit(
    State(state): State<Shared>,
    Path(id): Path<String>,
    b: Result<Json<EncodingRequest>, JsonRejection>,
) -> ApiResult {
    let req = body(&state, b)?;
    let program = state.with(&id, |s| s.refit(&req.slot, &req.attribute))?;
    ok(json!({ "program": program }))
}

async fn recommendations(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let (st, viz, recs) = state.with(&id, |s| {
        let recs = s.recommendations(&state.model);
        Ok((s.state, s.viz, recs))
    })?;
    ok(json!({ "state": st, "viz": viz, "recommendations": recs }))
}

#[derive(Deserialize)]
struct AcceptRequest {
    interaction: String,
}

async fn accept(
    State(state): State<Shared>,
    Path(id): Path<String>,
    b: Result<Json<AcceptRequest>, JsonRejection>,
) -> ApiResult {
    let req = body(&state, b)?;
    let i: InteractionType = req.interaction.parse().map_err(|_| {
        ServiceError::InvalidRequest(format!("unknown interaction `{}`", req.interaction))
    })?;
    let result = state.with(&id, |s| s.accept(i, &state.model))?;
    ok(json!({ "result": result }))
}

async fn undo(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    ok(state.with(&id, |s| s.undo(&state.model))?)
}

#[derive(Deserialize, Default)]
struct IgnoreRequest {
    #[serde(default)]
    interactions: Vec<InteractionType>,
}

async fn ignore(
    State(state): State<Shared>,
    Path(id): Path<String>,
    b: Result<Json<IgnoreRequest>, JsonRejection>,
) -> ApiResult {
    let req = body(&state, b)?;
    state.with(&id, |s| {
        s.ignore(&req.interactions, &state.model);
        Ok(())
    })?;
    ok(json!({ "ignored": req.interactions }))
}

async fn get_source(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let source = state.with(&id, |s| Ok(s.source.clone()))?;
    Ok((
        [(header::CONTENT_TYPE, "text/javascript; charset=utf-8")],
        source,
    )
        .into_response())
}

#[derive(Deserialize)]
struct SourceRequest {
    source: String,
}

async fn set_source(
    State(state): State<Shared>,
    Path(id): Path<String>,
    b: Result<Json<SourceRequest>, JsonRejection>,
) -> ApiResult {
    let req = body(&state, b)?;
    let (parse_error, view) = state.with(&id, |s| Ok((s.set_source(req.source), s.view())))?;
    ok(json!({ "session": view, "parse_error": parse_error }))
}

#[derive(Deserialize)]
struct SvgRequest {
    svg: String,
}

async fn classify(
    State(state): State<Shared>,
    Path(id): Path<String>,
    b: Result<Json<SvgRequest>, JsonRejection>,
) -> ApiResult {
    let req = body(&state, b)?;
    let c = state.with(&id, |s| s.classify(&req.svg))?;
    ok(json!({ "classification": c }))
}

#[derive(Deserialize, Default)]
struct ExportRequest {
    svg: Option<String>,
}

async fn export(
    State(state): State<Shared>,
    Path(id): Path<String>,
    raw: Result<Bytes, BytesRejection>,
) -> ApiResult {
    let bytes = raw.map_err(|e| ServiceError::InvalidRequest(e.body_text()))?;
    let req: ExportRequest = if bytes.iter().all(u8::is_ascii_whitespace) {
        ExportRequest::default()
    } else {
        serde_json::from_slice(&bytes).map_err(|e| ServiceError::InvalidRequest(e.to_string()))?
    };
    let bundle = state.with(&id, |s| Ok(s.export(req.svg, &state.model)))?;
    ok(bundle)
}

async fn events(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let events: Vec<SessionEvent> = state.with(&id, |s| Ok(s.events.clone()))?;
    ok(json!({ "events": events }))
}

async fn data_csv(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult {
    let csv = state.with(&id, |s| {
        s.dataset
            .as_ref()
            .map(|d| d.to_csv())
            .ok_or(ServiceError::NoDataset)
    })?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}
