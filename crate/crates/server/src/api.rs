//! JSON endpoints over the published snapshot.
//!
//! Every handler grabs the current snapshot once and answers from it alone,
//! so a concurrent reload can never leak into a half-served response.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use tweetscape::analytics::{self, AnalyticsError, CellCounts, TimeInterval, UserPath};
use tweetscape::ingest;
use tweetscape::layout::{self, QueryWall};
use tweetscape::{GeoBounds, MeshChunk, Placement, SceneFrame, TweetRecord};

use crate::config::ServiceConfig;
use crate::snapshot::{build_snapshot, Snapshot, SnapshotStore};

pub const GROUND_IMAGE_ROUTE: &str = "/assets/ground-image";

pub struct AppState {
    pub config: ServiceConfig,
    pub store: SnapshotStore,
    reload: Mutex<()>,
}

impl AppState {
    pub fn new(config: ServiceConfig, snapshot: Snapshot) -> Arc<Self> {
        Arc::new(AppState {
            config,
            store: SnapshotStore::new(snapshot),
            reload: Mutex::new(()),
        })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/scene", get(scene))
        .route(GROUND_IMAGE_ROUTE, get(ground_image))
        .route("/terrain", get(terrain))
        .route("/tweets", get(tweets))
        .route("/tweets/{id}", get(tweet))
        .route("/query", post(query))
        .route("/users/{name}/path", get(user_path))
        .route("/stats", get(stats))
        .route("/admin/reload", post(reload))
        .with_state(state)
}

/// Error body: `{"error": <code>, "detail": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn bad_request(code: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code,
            detail: detail.into(),
        }
    }

    fn not_found(detail: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            code: "not-found",
            detail: detail.into(),
        }
    }

    fn internal(code: &'static str, detail: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code,
            detail: detail.into(),
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        ApiError::bad_request(e.code(), e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    detail: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            detail: &self.detail,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Health {
    pub status: String,
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok".into() })
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SceneResponse {
    pub frame: SceneFrame,
    pub ground_image: Option<String>,
    #[serde(with = "ingest::timestamp")]
    pub load_timestamp: DateTime<Utc>,
}

pub fn scene_response(snap: &Snapshot) -> SceneResponse {
    SceneResponse {
        frame: snap.frame,
        ground_image: snap.ground_image.as_ref().map(|_| GROUND_IMAGE_ROUTE.to_string()),
        load_timestamp: snap.load_timestamp,
    }
}

async fn scene(State(state): State<Arc<AppState>>) -> Json<SceneResponse> {
    Json(scene_response(&state.store.current()))
}

async fn ground_image(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let snap = state.store.current();
    let path = snap
        .ground_image
        .as_ref()
        .ok_or_else(|| ApiError::not_found("no ground image configured"))?;
    let bytes = tokio::fs::read(path)
        .await
        .map_err(|e| ApiError::internal("asset-unreadable", e.to_string()))?;
    let mime = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        _ => "application/octet-stream",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TerrainResponse {
    pub chunks: Vec<MeshChunk>,
}

async fn terrain(State(state): State<Arc<AppState>>) -> Json<TerrainResponse> {
    Json(TerrainResponse {
        chunks: state.store.current().terrain_chunks.clone(),
    })
}

#[derive(Debug, Default, Deserialize)]
pub struct TweetsParams {
    pub from: Option<String>,
    pub to: Option<String>,
    /// `min_lat,min_lon,max_lat,max_lon`
    pub bbox: Option<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PlacementsResponse {
    pub placements: Vec<Placement>,
}

fn parse_instant(text: Option<&str>, default: DateTime<Utc>) -> Result<DateTime<Utc>, ApiError> {
    match text {
        None => Ok(default),
        Some(t) => ingest::parse_timestamp(t)
            .ok_or_else(|| ApiError::bad_request("bad-timestamp", format!("{t:?} is not an ISO-8601 UTC instant"))),
    }
}

fn parse_bbox(text: &str) -> Result<GeoBounds, ApiError> {
    let bad = |detail: String| ApiError::bad_request("bad-bbox", detail);
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    match parts[..] {
        [a, b, c, d] => GeoBounds::new(a, b, c, d).map_err(|e| bad(e.to_string())),
        _ => Err(bad("expected min_lat,min_lon,max_lat,max_lon".into())),
    }
}

/// Placements whose records fall in the time interval and, when given, the
/// bounding box; chronological.
pub fn tweets_response(snap: &Snapshot, params: &TweetsParams) -> Result<PlacementsResponse, ApiError> {
    let all = TimeInterval::all();
    let start = parse_instant(params.from.as_deref(), all.start)?;
    let end = parse_instant(params.to.as_deref(), all.end)?;
    let interval = TimeInterval::new(start, end)?;
    let bbox = params.bbox.as_deref().map(parse_bbox).transpose()?;

    let placements = analytics::filter_time(&snap.dataset, &interval)
        .iter()
        .filter(|id| match (&bbox, snap.record(id)) {
            (Some(b), Some(r)) => b.contains(r.latitude, r.longitude),
            _ => true,
        })
        .filter_map(|id| snap.placement(id).cloned())
        .collect();
    Ok(PlacementsResponse { placements })
}

async fn tweets(State(state): State<Arc<AppState>>, Query(params): Query<TweetsParams>) -> ApiResult<PlacementsResponse> {
    tweets_response(&state.store.current(), &params).map(Json)
}

async fn tweet(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<TweetRecord> {
    let snap = state.store.current();
    snap.record(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("no record with id {id}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryRequest {
    pub keyword: String,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct QueryResponse {
    pub wall: QueryWall,
}

pub fn query_response(snap: &Snapshot, keyword: &str) -> Result<QueryResponse, ApiError> {
    let ids = analytics::search(&snap.dataset, keyword)?;
    let wall = layout::build_wall(&snap.dataset, keyword.trim(), &ids, &snap.frame, &snap.wall)
        .map_err(|e| ApiError::internal("layout", e.to_string()))?;
    Ok(QueryResponse { wall })
}

async fn query(
    State(state): State<Arc<AppState>>,
    body: Result<Json<QueryRequest>, JsonRejection>,
) -> ApiResult<QueryResponse> {
    let Json(req) = body.map_err(|e| ApiError::bad_request("bad-request", e.body_text()))?;
    query_response(&state.store.current(), &req.keyword).map(Json)
}

async fn user_path(State(state): State<Arc<AppState>>, Path(name): Path<String>) -> Json<UserPath> {
    Json(analytics::user_path(&state.store.current().dataset, &name))
}

#[derive(Debug, Default, Deserialize)]
pub struct StatsParams {
    pub cell_size: Option<String>,
}

pub fn stats_response(snap: &Snapshot, params: &StatsParams) -> Result<CellCounts, ApiError> {
    let cell = match params.cell_size.as_deref() {
        None => snap.stack.cell_size_m,
        Some(text) => text
            .parse()
            .map_err(|_| ApiError::bad_request("bad-cell-size", format!("{text:?} is not a number")))?,
    };
    Ok(analytics::cluster_stats(&snap.dataset, &snap.frame, cell)?)
}

async fn stats(State(state): State<Arc<AppState>>, Query(params): Query<StatsParams>) -> ApiResult<CellCounts> {
    stats_response(&state.store.current(), &params).map(Json)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ReloadResponse {
    #[serde(with = "ingest::timestamp")]
    pub load_timestamp: DateTime<Utc>,
    pub records: usize,
}

async fn reload(State(state): State<Arc<AppState>>) -> ApiResult<ReloadResponse> {
    // one rebuild at a time; readers keep using the old snapshot meanwhile
    let _guard = state.reload.lock().await;
    let config = state.config.clone();
    let built = tokio::task::spawn_blocking(move || build_snapshot(&config))
        .await
        .map_err(|e| ApiError::internal("reload-failed", e.to_string()))?
        .map_err(|e| ApiError::internal("reload-failed", e.to_string()))?;
    let published = state.store.publish(built);
    tracing::info!(records = published.dataset.len(), "snapshot reloaded");
    Ok(Json(ReloadResponse {
        load_timestamp: published.load_timestamp,
        records: published.dataset.len(),
    }))
}
