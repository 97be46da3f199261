//! HTTP service for interactive use: open a volume, page through axial
//! slices, segment with a growing list of seeds and download the results.
//!
//! | method | path | body / query | answer |
//! |---|---|---|---|
//! | POST | `/session` | JSON `{"path", "format"?, "reference"?}` or raw NIfTI bytes | session id and volume metadata |
//! | GET | `/session/{id}/slice/{z}` | `lo`, `hi` window | 8-bit PNG |
//! | POST | `/session/{id}/segment` | [`SegmentRequest`] | [`SegmentResponse`] |
//! | GET | `/session/{id}/export/{mask,mesh,csv}` | | NIfTI mask, OBJ mesh or CSV row |
//!
//! Errors are JSON `{"error": {"kind", "message"}}`.

mod session;
mod slice;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use polarcut::metrics::{CaseStats, CSV_HEADER};
use polarcut::volume::{load_volume, parse_nifti};
use polarcut::{BinaryMask, VolumeFormat};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ErrorBody, ErrorDetail};
pub use session::{JobResult, SegmentRequest, SegmentResponse, Session};
pub use slice::{slice_png, window};

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: u16, kind: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::from_u16(status).expect("valid status"),
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        let status = match e.kind() {
            "seed_out_of_bounds"
            | "conflicting_constraint"
            | "infeasible_constraints"
            | "invalid_params"
            | "no_seeds" => 422,
            "internal" => 500,
            _ => 400,
        };
        ApiError::new(status, e.kind(), e.to_string())
    }
}

impl From<polarcut::Error> for ApiError {
    fn from(e: polarcut::Error) -> Self {
        CliError::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                kind: self.kind,
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Shared server state.
#[derive(Debug)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
    queueing: bool,
}

impl AppState {
    /// With `queueing` off, a segment request against a busy session gets
    /// 409 instead of waiting its turn.
    pub fn new(queueing: bool) -> Arc<Self> {
        Arc::new(AppState {
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            queueing,
        })
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Session>> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(404, "unknown_session", format!("no session {id}")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/session", post(open_session))
        .route("/session/{id}/slice/{z}", get(get_slice))
        .route("/session/{id}/segment", post(run_segment))
        .route("/session/{id}/export/{what}", get(export))
        .with_state(state)
}

pub async fn serve(host: &str, port: u16, queueing: bool) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(queueing))).await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenRequest {
    path: PathBuf,
    #[serde(default)]
    format: Option<VolumeFormat>,
    #[serde(default)]
    reference: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub intensity_range: [f64; 2],
}

fn malformed(e: serde_json::Error) -> ApiError {
    ApiError::new(400, "malformed_json", e.to_string())
}

async fn open_session(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<SessionInfo>> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    let (volume, reference) = if is_json {
        let req: OpenRequest = serde_json::from_slice(&body).map_err(malformed)?;
        let format = req
            .format
            .unwrap_or_else(|| VolumeFormat::from_path(&req.path));
        let volume = load_volume(&req.path, format)?;
        let reference = req.reference.map(BinaryMask::load).transpose()?;
        (volume, reference)
    } else {
        (parse_nifti(&body)?, None)
    };
    if let Some(r) = &reference {
        if r.dims() != volume.dims() {
            return Err(polarcut::Error::DimensionMismatch(format!(
                "reference mask {:?} vs volume {:?}",
                r.dims(),
                volume.dims()
            ))
            .into());
        }
    }
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::SeqCst));
    let (lo, hi) = volume.intensity_range();
    let info = SessionInfo {
        id: id.clone(),
        dims: volume.dims(),
        spacing: volume.spacing(),
        intensity_range: [lo, hi],
    };
    let session = Arc::new(Session::new(id.clone(), volume, reference));
    state
        .sessions
        .write()
        .expect("sessions lock")
        .insert(id, session);
    Ok(Json(info))
}

#[derive(Debug, Deserialize)]
struct WindowQuery {
    lo: Option<f64>,
    hi: Option<f64>,
}

async fn get_slice(
    State(state): State<Arc<AppState>>,
    Path((id, z)): Path<(String, usize)>,
    Query(q): Query<WindowQuery>,
) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let v = &session.volume;
    if z >= v.dims()[2] {
        return Err(ApiError::new(
            404,
            "slice_out_of_range",
            format!("slice {z} outside 0..{}", v.dims()[2]),
        ));
    }
    let (min, max) = v.intensity_range();
    let png = slice_png(v, z, q.lo.unwrap_or(min), q.hi.unwrap_or(max))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn run_segment(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SegmentResponse>> {
    let session = state.session(&id)?;
    let req: SegmentRequest = serde_json::from_slice(&body).map_err(malformed)?;
    let result = session.run(req, state.queueing).await?;
    Ok(Json(result.response.clone()))
}

async fn export(
    State(state): State<Arc<AppState>>,
    Path((id, what)): Path<(String, String)>,
) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let no_result = || {
        ApiError::new(
            404,
            "no_result",
            "no segmentation has finished for this session yet",
        )
    };
    match what.as_str() {
        "mask" => {
            let latest = session.latest().ok_or_else(no_result)?;
            let bytes = latest.mask.to_nifti_bytes()?;
            Ok((
                [
                    (header::CONTENT_TYPE, "application/octet-stream"),
                    (
                        header::CONTENT_DISPOSITION,
                        "attachment; filename=\"mask.nii\"",
                    ),
                ],
                bytes,
            )
                .into_response())
        }
        "mesh" => {
            let latest = session.latest().ok_or_else(no_result)?;
            Ok(([(header::CONTENT_TYPE, "text/plain")], latest.mesh.to_obj()).into_response())
        }
        "csv" => {
            let latest = session.latest().ok_or_else(no_result)?;
            let one_click = session.latest_one_click().ok_or_else(no_result)?;
            let reference = session.reference.as_ref().ok_or_else(|| {
                ApiError::new(
                    404,
                    "no_reference",
                    "session was opened without a reference mask",
                )
            })?;
            let row = CaseStats::from_masks(
                session.id.clone(),
                reference,
                &one_click.mask,
                &latest.mask,
            )?;
            let body = format!("{CSV_HEADER}\n{}\n", row.csv_row());
            Ok(([(header::CONTENT_TYPE, "text/csv")], body).into_response())
        }
        other => Err(ApiError::new(
            404,
            "unknown_export",
            format!("cannot export '{other}'; use mask, mesh or csv"),
        )),
    }
}
