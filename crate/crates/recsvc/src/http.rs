//! HTTP routes. Each handler resolves ids, takes the session lock and
//! delegates to [`SessionContext`].

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use nextview_core::{column_stats, CategoryKind, Dataset, LoadOptions, SchemaOverride, SpecInput};

use crate::error::ServiceError;
use crate::session::{RecQuery, SessionContext};
use crate::store::Store;
use crate::wire::{
    ApiEnvelope, ChartSet, CreateSession, DatasetInfo, KeyRequest, SchemaInfo, SessionCreated, StarRequest,
    ToggleRequest, ViewPayload,
};

type Shared = Arc<Store>;
type ApiResult<T> = Result<Json<ApiEnvelope<T>>, ServiceError>;

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/datasets", post(upload))
        .route("/datasets/{id}/schema", get(schema))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_snapshot))
        .route("/sessions/{id}/view", get(get_view).put(put_view))
        .route("/sessions/{id}/recommendations", get(recommendations))
        .route("/sessions/{id}/promote", post(promote))
        .route("/sessions/{id}/star", post(star))
        .route("/sessions/{id}/toggle-category", post(toggle))
        .route("/sessions/{id}/log", get(log))
        .fallback(|| async { (StatusCode::NOT_FOUND, Json(ApiEnvelope::err("not_found", "no such route".into()))) })
        .with_state(store)
}

fn ok<T>(data: T) -> ApiResult<T> {
    Ok(Json(ApiEnvelope::ok(data)))
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

/// Runs `f` on the session with its lock held, then forwards any new log
/// events.
async fn on_session<T: Send + 'static>(
    store: &Shared,
    id: &str,
    f: impl FnOnce(&mut SessionContext, &Dataset) -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ServiceError> {
    let slot = store.session(id)?;
    let mut ctx = slot.lock_owned().await;
    let ds = store.dataset(&ctx.dataset_ref)?;
    let (ctx, out) = tokio::task::spawn_blocking(move || {
        let before = ctx.interaction_log.len();
        let out = f(&mut ctx, &ds);
        (ctx, out.map(|v| (v, before)))
    })
    .await
    .expect("session task panicked");
    let (value, before) = out?;
    for e in &ctx.interaction_log[before..] {
        store.record(Some(e));
    }
    Ok(value)
}

#[derive(Deserialize)]
struct JsonUpload {
    csv: String,
    #[serde(default)]
    schema_override: Option<SchemaOverride>,
}

/// Accepts raw CSV, or JSON `{"csv": "...", "schema_override": {...}}`.
async fn upload(State(store): State<Shared>, headers: HeaderMap, body: Bytes) -> ApiResult<DatasetInfo> {
    let is_json = headers.get(CONTENT_TYPE).and_then(|v| v.to_str().ok()).is_some_and(|v| v.starts_with("application/json"));
    let (bytes, options) = if is_json {
        let up: JsonUpload = parse(&body)?;
        (Bytes::from(up.csv), LoadOptions { schema_override: up.schema_override })
    } else {
        (body, LoadOptions::default())
    };
    let (dataset_id, ds) = tokio::task::spawn_blocking({
        let store = store.clone();
        move || store.add_dataset(&bytes, &options)
    })
    .await
    .expect("load task panicked")?;
    ok(DatasetInfo { dataset_id, row_count: ds.row_count(), columns: ds.schema().columns().cloned().collect() })
}

async fn schema(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult<SchemaInfo> {
    let ds = store.dataset(&id)?;
    let columns: Vec<_> = ds.schema().columns().cloned().collect();
    let stats = columns.iter().map(|c| column_stats(&ds, &c.name).expect("schema column")).collect();
    ok(SchemaInfo { dataset_id: id, row_count: ds.row_count(), columns, stats })
}

async fn create_session(State(store): State<Shared>, body: Bytes) -> ApiResult<SessionCreated> {
    let req: CreateSession = parse(&body)?;
    let session_id = store.create_session(&req.dataset_id)?;
    ok(SessionCreated { session_id, dataset_id: req.dataset_id })
}

async fn session_snapshot(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult<SessionContext> {
    let snapshot = store.session(&id)?.lock().await.clone();
    ok(snapshot)
}

async fn get_view(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult<ViewPayload> {
    on_session(&store, &id, |ctx, ds| Ok(ctx.view_payload(ds))).await.map(|v| Json(ApiEnvelope::ok(v)))
}

async fn put_view(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<ViewPayload> {
    let input: SpecInput = parse(&body)?;
    on_session(&store, &id, move |ctx, ds| ctx.set_view(ds, &input)).await.map(|v| Json(ApiEnvelope::ok(v)))
}

async fn recommendations(
    State(store): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<RecQuery>, QueryRejection>,
) -> ApiResult<ChartSet> {
    let Query(query) = query.map_err(|e| ServiceError::BadRequest(e.body_text()))?;
    on_session(&store, &id, move |ctx, ds| Ok(ctx.recommendations(ds, &query))).await.map(|v| Json(ApiEnvelope::ok(v)))
}

async fn promote(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<ViewPayload> {
    let req: KeyRequest = parse(&body)?;
    on_session(&store, &id, move |ctx, ds| ctx.promote(ds, &req.key)).await.map(|v| Json(ApiEnvelope::ok(v)))
}

#[derive(Serialize)]
pub struct Starred {
    pub starred: Vec<String>,
}

async fn star(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Starred> {
    let req: StarRequest = parse(&body)?;
    on_session(&store, &id, move |ctx, _| Ok(Starred { starred: ctx.star(&req.key, req.starred)?.iter().cloned().collect() }))
        .await
        .map(|v| Json(ApiEnvelope::ok(v)))
}

async fn toggle(State(store): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<BTreeMap<CategoryKind, bool>> {
    let req: ToggleRequest = parse(&body)?;
    on_session(&store, &id, move |ctx, _| Ok(ctx.toggle(req.category, req.enabled).clone()))
        .await
        .map(|v| Json(ApiEnvelope::ok(v)))
}

async fn log(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult<Vec<crate::session::Event>> {
    let events = store.session(&id)?.lock().await.interaction_log.clone();
    ok(events)
}
