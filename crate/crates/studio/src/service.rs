//! HTTP JSON API over the model store.
//!
//! Training requests are queued to a single background worker thread; every
//! other endpoint answers synchronously from immutable, already-loaded models.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex, RwLock};
use std::thread;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use slider_core::{build_point_cloud, tokenize, Dimension, Image, LatentImageModel, PoleLabels, TrainingConfig};

use crate::error::StudioError;
use crate::pgm::parse_pgm;
use crate::store::{self, Manifest, StoredModel};
use crate::wire::{probe_json, serialize_point_cloud};

pub const CLASS_AXIS: &str = "class-axis";
const DEFAULT_K: usize = 10;
const DEFAULT_MAX_POINTS: usize = 200;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Directory of built web UI assets, served for unmatched paths.
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    TrainWords,
    TrainImages,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub model_id: Option<String>,
    /// Error code when failed, e.g. `EmptyVocabulary`.
    pub error: Option<String>,
    pub detail: Option<String>,
}

enum Task {
    Words {
        text: Arc<String>,
        config: TrainingConfig,
    },
    Images {
        class_a: Vec<Image>,
        class_b: Vec<Image>,
        labels: PoleLabels,
        q: usize,
    },
}

struct LoadedModel {
    manifest: Manifest,
    model: StoredModel,
}

pub struct AppState {
    config: ServiceConfig,
    corpora: RwLock<HashMap<String, Arc<String>>>,
    jobs: RwLock<HashMap<String, JobRecord>>,
    models: RwLock<BTreeMap<String, Arc<LoadedModel>>>,
    queue: Mutex<mpsc::Sender<(String, Task)>>,
    // serializes sliders.json writers
    slider_writes: Mutex<()>,
}

impl std::fmt::Debug for AppState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AppState").field("config", &self.config).finish_non_exhaustive()
    }
}

impl AppState {
    /// Loads every model under `<data_dir>/models` and starts the job worker.
    pub fn open(config: ServiceConfig) -> Result<Arc<Self>, StudioError> {
        let models_dir = config.data_dir.join("models");
        std::fs::create_dir_all(&models_dir).map_err(StudioError::io(&models_dir))?;
        let mut models = BTreeMap::new();
        for entry in std::fs::read_dir(&models_dir).map_err(StudioError::io(&models_dir))? {
            let path = entry.map_err(StudioError::io(&models_dir))?.path();
            let Some(id) = path.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
                continue;
            };
            if id.starts_with('.') || !path.join(store::MANIFEST).is_file() {
                continue;
            }
            models.insert(id, Arc::new(load_dir(&path)?));
        }

        let (tx, rx) = mpsc::channel();
        let state = Arc::new(AppState {
            config,
            corpora: RwLock::default(),
            jobs: RwLock::default(),
            models: RwLock::new(models),
            queue: Mutex::new(tx),
            slider_writes: Mutex::new(()),
        });
        let worker = Arc::downgrade(&state);
        thread::Builder::new()
            .name("training-worker".into())
            .spawn(move || {
                for (job_id, task) in rx {
                    let Some(state) = worker.upgrade() else { break };
                    state.run_job(&job_id, task);
                }
            })
            .map_err(StudioError::io("training-worker"))?;
        Ok(state)
    }

    fn model_dir(&self, id: &str) -> PathBuf {
        self.config.data_dir.join("models").join(id)
    }

    fn model(&self, id: &str) -> Result<Arc<LoadedModel>, ApiError> {
        self.models
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| StudioError::UnknownModel(id.to_string()).into())
    }

    fn set_job(&self, id: &str, update: impl FnOnce(&mut JobRecord)) {
        if let Some(job) = self.jobs.write().unwrap().get_mut(id) {
            update(job);
        }
    }

    fn enqueue(&self, kind: JobKind, task: Task) -> String {
        let id = fresh_id("job");
        self.jobs.write().unwrap().insert(
            id.clone(),
            JobRecord {
                id: id.clone(),
                kind,
                status: JobStatus::Queued,
                model_id: None,
                error: None,
                detail: None,
            },
        );
        if self.queue.lock().unwrap().send((id.clone(), task)).is_err() {
            self.set_job(&id, |j| {
                j.status = JobStatus::Failed;
                j.error = Some("WorkerUnavailable".into());
            });
        }
        id
    }

    fn run_job(&self, job_id: &str, task: Task) {
        self.set_job(job_id, |j| j.status = JobStatus::Running);
        match self.train(task) {
            Ok(model_id) => self.set_job(job_id, |j| {
                j.status = JobStatus::Done;
                j.model_id = Some(model_id);
            }),
            Err(e) => self.set_job(job_id, |j| {
                j.status = JobStatus::Failed;
                j.error = Some(e.code().to_string());
                j.detail = Some(e.to_string());
            }),
        }
    }

    fn train(&self, task: Task) -> Result<String, StudioError> {
        let id = fresh_id("m");
        let dir = self.model_dir(&id);
        match task {
            Task::Words { text, config } => {
                let tokens = tokenize(&text);
                let model = slider_core::train_embeddings(&tokens, &config)?;
                store::save_model(&StoredModel::Words(model), &dir)?;
            }
            Task::Images {
                class_a,
                class_b,
                labels,
                q,
            } => {
                let union: Vec<Image> = class_a.iter().chain(&class_b).cloned().collect();
                let model = LatentImageModel::fit(&union, q)?;
                let dim = Dimension::from_images(&model, &class_a, &class_b, labels)?.with_model_id(&id);
                store::save_model(&StoredModel::Images(model), &dir)?;
                store::save_slider(&dim, &dir, Some(CLASS_AXIS))?;
            }
        }
        // serve exactly what a later restart would load
        let loaded = load_dir(&dir)?;
        self.models.write().unwrap().insert(id.clone(), Arc::new(loaded));
        Ok(id)
    }
}

fn load_dir(dir: &Path) -> Result<LoadedModel, StudioError> {
    Ok(LoadedModel {
        manifest: store::read_manifest(dir)?,
        model: store::load_model(dir)?,
    })
}

fn fresh_id(prefix: &str) -> String {
    format!("{prefix}-{}", uuid::Uuid::new_v4().simple())
}

/// Uniform `{"error": code, "detail": string}` error response.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    detail: String,
}

impl ApiError {
    fn bad(code: &str, detail: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: code.into(),
            detail: detail.into(),
        }
    }
}

impl From<StudioError> for ApiError {
    fn from(e: StudioError) -> Self {
        let status = match &e {
            StudioError::UnknownModel(_) | StudioError::UnknownSlider(_) => StatusCode::NOT_FOUND,
            StudioError::Io { .. } | StudioError::CorruptStore(_) | StudioError::UnsupportedVersion(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            StudioError::DuplicateSlider(_) => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            code: e.code().to_string(),
            detail: e.detail(),
        }
    }
}

impl From<slider_core::Error> for ApiError {
    fn from(e: slider_core::Error) -> Self {
        StudioError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.code, "detail": self.detail}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad("BadRequest", e.to_string()))
}

fn json_bytes(status: StatusCode, bytes: Vec<u8>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/corpora", post(create_corpus))
        .route("/models", get(list_models))
        .route("/models/words", post(train_words))
        .route("/models/images", post(train_images))
        .route("/models/{id}", get(model_detail))
        .route("/models/{id}/sliders", get(list_model_sliders).post(create_slider))
        .route("/models/{id}/sliders/{sid}/probe", get(probe))
        .route("/models/{id}/pointcloud", get(pointcloud))
        .route("/jobs/{id}", get(job_status));
    let api = match &state.config.static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    };
    api.with_state(state)
}

/// Binds and serves until ctrl-c.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<(), StudioError> {
    let state = AppState::open(config)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(StudioError::io(addr.to_string()))?;
    eprintln!("listening on http://{}", listener.local_addr().map_err(StudioError::io("listener"))?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(StudioError::io(addr.to_string()))
}

#[derive(Deserialize)]
struct CorpusRequest {
    text: String,
}

async fn create_corpus(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let req: CorpusRequest = parse_body(&body)?;
    if req.text.trim().is_empty() {
        return Err(ApiError::bad("EmptyCorpus", "corpus text is empty"));
    }
    let id = fresh_id("c");
    state.corpora.write().unwrap().insert(id.clone(), Arc::new(req.text));
    Ok((StatusCode::CREATED, Json(json!({ "corpus_id": id }))).into_response())
}

#[derive(Deserialize)]
struct TrainWordsRequest {
    corpus_id: String,
    #[serde(default)]
    config: Option<Value>,
}

async fn train_words(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let req: TrainWordsRequest = parse_body(&body)?;
    let text = state
        .corpora
        .read()
        .unwrap()
        .get(&req.corpus_id)
        .cloned()
        .ok_or_else(|| ApiError {
            status: StatusCode::NOT_FOUND,
            code: "UnknownCorpus".into(),
            detail: req.corpus_id.clone(),
        })?;
    let config: TrainingConfig = match req.config {
        Some(v) => serde_json::from_value(v).map_err(|e| ApiError::bad("InvalidConfig", e.to_string()))?,
        None => TrainingConfig::default(),
    };
    config.validate()?;
    let job_id = state.enqueue(JobKind::TrainWords, Task::Words { text, config });
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job_id }))).into_response())
}

#[derive(Deserialize)]
struct TrainImagesRequest {
    class_a: Vec<String>,
    class_b: Vec<String>,
    q: usize,
    #[serde(default)]
    labels: Option<[String; 2]>,
}

fn decode_images(payloads: &[String]) -> ApiResult<Vec<Image>> {
    payloads
        .iter()
        .enumerate()
        .map(|(i, b64)| {
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(b64.trim())
                .map_err(|e| ApiError::bad("MalformedPgm", format!("image {i}: {e}")))?;
            parse_pgm(&bytes).map_err(ApiError::from)
        })
        .collect()
}

async fn train_images(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let req: TrainImagesRequest = parse_body(&body)?;
    if req.class_a.is_empty() || req.class_b.is_empty() {
        return Err(ApiError::bad("InvalidConfig", "both image classes must be non-empty"));
    }
    if req.q < 1 {
        return Err(ApiError::bad("InvalidConfig", "q must be at least 1"));
    }
    let class_a = decode_images(&req.class_a)?;
    let class_b = decode_images(&req.class_b)?;
    let [a, b] = req.labels.unwrap_or_else(|| ["class_a".into(), "class_b".into()]);
    let task = Task::Images {
        class_a,
        class_b,
        labels: PoleLabels::new(a, b),
        q: req.q,
    };
    let job_id = state.enqueue(JobKind::TrainImages, task);
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": job_id }))).into_response())
}

async fn job_status(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let job = state.jobs.read().unwrap().get(&id).cloned().ok_or_else(|| ApiError {
        status: StatusCode::NOT_FOUND,
        code: "UnknownJob".into(),
        detail: id.clone(),
    })?;
    Ok(Json(job).into_response())
}

fn summary(id: &str, m: &LoadedModel) -> Value {
    json!({
        "id": id,
        "model_type": m.manifest.model_type,
        "created_at": m.manifest.created_at,
        "shape": m.manifest.shape,
    })
}

async fn list_models(State(state): State<Arc<AppState>>) -> Json<Value> {
    let models = state.models.read().unwrap();
    let mut listed: Vec<(&String, &Arc<LoadedModel>)> = models.iter().collect();
    listed.sort_by(|a, b| a.1.manifest.created_at.cmp(&b.1.manifest.created_at).then(a.0.cmp(b.0)));
    Json(Value::Array(listed.into_iter().map(|(id, m)| summary(id, m)).collect()))
}

async fn model_detail(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let loaded = state.model(&id)?;
    let sliders: Vec<String> = store::list_sliders(&state.model_dir(&id))?
        .into_iter()
        .map(|s| s.id)
        .collect();
    let mut body = summary(&id, &loaded);
    body["config"] = loaded.manifest.config.clone();
    body["sliders"] = json!(sliders);
    Ok(Json(body))
}

async fn list_model_sliders(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Value>> {
    state.model(&id)?;
    let sliders = store::list_sliders(&state.model_dir(&id))?;
    Ok(Json(Value::Array(
        sliders
            .into_iter()
            .map(|s| json!({"id": s.id, "labels": s.labels, "pole_a": s.pole_a, "pole_b": s.pole_b}))
            .collect(),
    )))
}

#[derive(Deserialize)]
struct SliderRequest {
    pole_a: Vec<String>,
    pole_b: Vec<String>,
    labels: [String; 2],
}

async fn create_slider(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let loaded = state.model(&id)?;
    let model = loaded.model.as_words()?;
    let req: SliderRequest = parse_body(&body)?;
    if req.pole_a.is_empty() || req.pole_b.is_empty() {
        return Err(ApiError::bad("InvalidConfig", "both pole lists must be non-empty"));
    }
    let pole_a: Vec<&str> = req.pole_a.iter().map(String::as_str).collect();
    let pole_b: Vec<&str> = req.pole_b.iter().map(String::as_str).collect();
    let [a, b] = req.labels;
    let dim = Dimension::from_words(model, &pole_a, &pole_b, PoleLabels::new(a, b))?.with_model_id(&id);
    let _guard = state.slider_writes.lock().unwrap();
    let slider_id = store::save_slider(&dim, &state.model_dir(&id), None)?;
    Ok((StatusCode::CREATED, Json(json!({ "slider_id": slider_id }))).into_response())
}

fn param<T: std::str::FromStr>(params: &HashMap<String, String>, key: &str) -> ApiResult<Option<T>> {
    params
        .get(key)
        .map(|raw| {
            raw.parse()
                .map_err(|_| ApiError::bad("BadParameter", format!("{key}={raw:?} does not parse")))
        })
        .transpose()
}

async fn probe(
    State(state): State<Arc<AppState>>,
    UrlPath((id, sid)): UrlPath<(String, String)>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let loaded = state.model(&id)?;
    let dim = store::load_slider(&state.model_dir(&id), &sid)?;
    let t: f64 = param(&params, "t")?.ok_or_else(|| ApiError::bad("BadParameter", "t is required"))?;
    if !t.is_finite() {
        return Err(ApiError::bad("BadParameter", format!("t must be finite, got {t}")));
    }
    let result = match &loaded.model {
        StoredModel::Words(model) => {
            let base = params
                .get("base")
                .ok_or_else(|| ApiError::bad("BadParameter", "base is required for words models"))?;
            let k: usize = param(&params, "k")?.unwrap_or(DEFAULT_K);
            if k < 1 {
                return Err(ApiError::bad("BadParameter", "k must be at least 1"));
            }
            dim.probe_words(model, base, t, k)?
        }
        StoredModel::Images(model) => {
            let base = match params.get("base").filter(|b| !b.is_empty()) {
                Some(b64) => Some(decode_images(std::slice::from_ref(b64))?.remove(0)),
                None => None,
            };
            dim.probe_image(model, t, base.as_ref())?
        }
    };
    Ok(json_bytes(StatusCode::OK, probe_json(&result)))
}

async fn pointcloud(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let loaded = state.model(&id)?;
    let model = loaded.model.as_words()?;
    let max_points: usize = param(&params, "max_points")?.unwrap_or(DEFAULT_MAX_POINTS);
    let dim = match params.get("slider").filter(|s| !s.is_empty()) {
        Some(sid) => Some(store::load_slider(&state.model_dir(&id), sid)?),
        None => None,
    };
    let cloud = build_point_cloud(model, dim.as_ref(), max_points)?;
    Ok(json_bytes(StatusCode::OK, serialize_point_cloud(&cloud)))
}
