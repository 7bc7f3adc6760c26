//! JSON over HTTP.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use super::{Engine, ServiceError};
use crate::onboarding::{OnboardingConfig, Source};

const UPLOAD_LIMIT: usize = 512 * 1024 * 1024;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub kind: String,
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownDatabase(_) | ServiceError::UnknownResult(_) => StatusCode::NOT_FOUND,
            ServiceError::BackendUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::NoTranslation
            | ServiceError::UnsupportedSyntax { .. }
            | ServiceError::InvalidSql(_)
            | ServiceError::Rejected(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Onboarding(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Execution(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: self.to_string(), kind: self.kind().to_string() };
        (self.status(), Json(body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
pub struct QueryRequest {
    pub query: String,
    /// `YYYY-MM-DDTHH:MM:SS`; defaults to the server clock.
    #[serde(default)]
    pub reference_time: Option<NaiveDateTime>,
}

#[derive(Debug, Deserialize)]
pub struct HistoryParams {
    #[serde(default = "first_page")]
    pub page: usize,
}

fn first_page() -> usize {
    1
}

#[derive(Debug, Serialize)]
struct Onboarded {
    id: String,
    status: &'static str,
    database: crate::onboarding::OnboardedDatabase,
}

type AppState = Arc<Engine>;

/// Runs blocking engine work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Internal(e.to_string()))?
}

async fn upload(State(engine): State<AppState>, mut multipart: Multipart) -> Result<impl IntoResponse, ServiceError> {
    let bad = |e: axum::extract::multipart::MultipartError| ServiceError::BadRequest(e.to_string());
    let mut file: Option<(String, Vec<u8>)> = None;
    let mut config = OnboardingConfig::default();
    while let Some(field) = multipart.next_field().await.map_err(bad)? {
        match field.name() {
            Some("file") => {
                let name = field.file_name().unwrap_or("upload").to_string();
                file = Some((name, field.bytes().await.map_err(bad)?.to_vec()));
            }
            Some("config") => {
                let text = field.text().await.map_err(bad)?;
                if !text.trim().is_empty() {
                    config = serde_json::from_str(&text)
                        .map_err(|e| ServiceError::BadRequest(format!("config: {e}")))?;
                }
            }
            _ => {}
        }
    }
    let (name, bytes) = file.ok_or_else(|| ServiceError::BadRequest("missing multipart field \"file\"".into()))?;
    let db = blocking(move || {
        let path = engine.upload_path(&name)?;
        std::fs::write(&path, bytes)?;
        let source = Source::detect(&path)?;
        let result = engine.onboard(&source, &config);
        if let Some(dir) = path.parent() {
            let _ = std::fs::remove_dir_all(dir);
        }
        result
    })
    .await?;
    Ok((StatusCode::CREATED, Json(Onboarded { id: db.id.clone(), status: "onboarded", database: db })))
}

async fn list_databases(State(engine): State<AppState>) -> impl IntoResponse {
    let dbs: Vec<_> = engine.databases().iter().map(|d| (**d).clone()).collect();
    Json(dbs)
}

async fn query(
    State(engine): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<QueryRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    let response = blocking(move || engine.query(&id, &req.query, req.reference_time)).await?;
    Ok(Json(response))
}

async fn history(
    State(engine): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HistoryParams>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(blocking(move || engine.history(&id, params.page)).await?))
}

async fn result_csv(State(engine): State<AppState>, Path(rid): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    let bytes = engine.result_csv(&rid)?;
    Ok((
        [
            (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
            (header::CONTENT_DISPOSITION, format!("attachment; filename=\"result-{rid}.csv\"")),
        ],
        bytes,
    ))
}

async fn result_visualizations(
    State(engine): State<AppState>,
    Path(rid): Path<String>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(engine.result_visualizations(&rid)?))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/databases", post(upload).get(list_databases))
        .route("/databases/:id/query", post(query))
        .route("/databases/:id/history", get(history))
        .route("/results/:rid/csv", get(result_csv))
        .route("/results/:rid/visualizations", get(result_visualizations))
        .layer(DefaultBodyLimit::max(UPLOAD_LIMIT))
        .with_state(engine)
}

/// Serves the API until the process is stopped.
pub async fn serve(engine: Arc<Engine>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(engine)).await
}
