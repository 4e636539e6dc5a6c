//! HTTP API under `/api`.
//!
//! | method | path               | body / result                                        |
//! |--------|--------------------|------------------------------------------------------|
//! | POST   | `/api/images`      | `{imageBase64}` → `{imageId, width, height}`          |
//! | POST   | `/api/edits`       | edit request → `202 {jobId}` or `200` job when `sync` |
//! | GET    | `/api/edits/{id}`  | job state, `imagePng` (base64) and diagnostics        |
//! | GET    | `/api/health`      | `{version, predictorChecksum}`                        |
//!
//! Errors are `{"errors": [{"field", "message"}]}` with status 400 (invalid
//! request), 404 (unknown image or job) or 409 (job id already used).

use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use dragwarp_core::diffusion::weights::{checksum, golden_checksum};
use dragwarp_core::io::{decode_image, decode_mask, diagnostics_json, encode_png, InstructionSpec};
use dragwarp_core::pipeline;
use dragwarp_core::{validate_edit_request, DragMode, DragSet, EditConfig, ValidationError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::store::{JobState, JobView, Store, StoreError};

pub type SharedStore = Arc<Mutex<Store>>;

const BODY_LIMIT: usize = 64 * 1024 * 1024;

#[derive(Debug, Serialize)]
struct FieldError {
    field: String,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    errors: Vec<FieldError>,
}

struct ApiError {
    status: StatusCode,
    errors: Vec<FieldError>,
}

impl ApiError {
    fn new(status: StatusCode, field: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            errors: vec![FieldError {
                field: field.into(),
                message: message.into(),
            }],
        }
    }

    fn validation(errs: &[ValidationError]) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            errors: errs
                .iter()
                .map(|e| FieldError {
                    field: e.field.clone(),
                    message: e.message.clone(),
                })
                .collect(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { errors: self.errors })).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { String::new() } else { path };
        ApiError::new(StatusCode::BAD_REQUEST, &field, e.inner().to_string())
    })
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct UploadRequest {
    image_base64: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct UploadResponse {
    image_id: String,
    width: usize,
    height: usize,
}

/// Body of `POST /api/edits`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EditRequest {
    pub image_id: String,
    /// Base64 PNG; gray levels at or above 128 are editable.
    pub mask_png: String,
    pub instructions: Vec<InstructionSpec>,
    #[serde(default)]
    pub mode: DragMode,
    #[serde(default)]
    pub config: EditConfig,
    /// Run inline and answer with the finished job.
    #[serde(default)]
    pub sync: bool,
    #[serde(default)]
    pub job_id: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Accepted {
    job_id: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Health {
    version: &'static str,
    predictor_checksum: String,
}

async fn health() -> Json<Health> {
    Json(Health {
        version: env!("CARGO_PKG_VERSION"),
        predictor_checksum: golden_checksum(),
    })
}

async fn upload_image(State(store): State<SharedStore>, body: Bytes) -> Result<Json<UploadResponse>, ApiError> {
    let req: UploadRequest = parse_body(&body)?;
    let bytes = BASE64
        .decode(req.image_base64.trim())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "imageBase64", e.to_string()))?;
    let image = decode_image(&bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "imageBase64", e.to_string()))?;
    let image_id = format!("img-{}", &checksum(&bytes)[..16]);
    let (width, height) = image.dims();
    store.lock().expect("store lock").insert_image(image_id.clone(), image);
    Ok(Json(UploadResponse {
        image_id,
        width,
        height,
    }))
}

struct Prepared {
    image: Arc<dragwarp_core::LatentGrid>,
    mask: dragwarp_core::MaskBitmap,
    drags: DragSet,
    config: EditConfig,
}

fn run_job(job_id: String, p: Prepared) -> JobView {
    let mut view = JobView {
        job_id,
        state: JobState::Failed,
        image_png: None,
        diagnostics: None,
        error: None,
    };
    let outcome = match pipeline::edit(&p.image, &p.mask, &p.drags, &p.config) {
        Ok(o) => o,
        Err(e) => {
            view.error = Some(e.to_string());
            return view;
        }
    };
    match encode_png(&outcome.output) {
        Ok(png) => {
            view.state = JobState::Done;
            view.image_png = Some(BASE64.encode(png));
            view.diagnostics = serde_json::from_str(&diagnostics_json(&outcome)).ok();
        }
        Err(e) => view.error = Some(e.to_string()),
    }
    view
}

fn store_update(store: &SharedStore, view: JobView) {
    let _ = store.lock().expect("store lock").update(view);
}

async fn submit_edit(State(store): State<SharedStore>, body: Bytes) -> Result<Response, ApiError> {
    let req: EditRequest = parse_body(&body)?;
    let image = store
        .lock()
        .expect("store lock")
        .image(&req.image_id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "imageId", "unknown image"))?;
    let mask_bytes = BASE64
        .decode(req.mask_png.trim())
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "maskPng", e.to_string()))?;
    let mask = decode_mask(&mask_bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "maskPng", e.to_string()))?;
    let drags = DragSet::new(req.instructions.iter().map(Into::into).collect(), req.mode);
    validate_edit_request(&image, &drags, &mask, &req.config).map_err(|errs| ApiError::validation(&errs.0))?;

    let job_id = store
        .lock()
        .expect("store lock")
        .create_job(req.job_id.clone())
        .map_err(|e| match e {
            StoreError::Duplicate(id) => ApiError::new(StatusCode::CONFLICT, "jobId", format!("job {id} already exists")),
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "", other.to_string()),
        })?;
    let prepared = Prepared {
        image,
        mask,
        drags,
        config: req.config,
    };

    let worker = {
        let store = store.clone();
        let job_id = job_id.clone();
        async move {
            store_update(
                &store,
                JobView {
                    job_id: job_id.clone(),
                    state: JobState::Running,
                    image_png: None,
                    diagnostics: None,
                    error: None,
                },
            );
            let id = job_id.clone();
            let view = tokio::task::spawn_blocking(move || run_job(id, prepared))
                .await
                .unwrap_or_else(|e| JobView {
                    job_id: job_id.clone(),
                    state: JobState::Failed,
                    image_png: None,
                    diagnostics: None,
                    error: Some(format!("worker crashed: {e}")),
                });
            store_update(&store, view.clone());
            view
        }
    };

    if req.sync {
        let view = worker.await;
        Ok((StatusCode::OK, Json(view)).into_response())
    } else {
        tokio::spawn(worker);
        Ok((StatusCode::ACCEPTED, Json(Accepted { job_id })).into_response())
    }
}

async fn get_edit(State(store): State<SharedStore>, Path(id): Path<String>) -> Result<Json<JobView>, ApiError> {
    store
        .lock()
        .expect("store lock")
        .job(&id)
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "id", format!("unknown job {id}")))
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/images", post(upload_image))
        .route("/api/edits", post(submit_edit))
        .route("/api/edits/{id}", get(get_edit))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(store)
}
