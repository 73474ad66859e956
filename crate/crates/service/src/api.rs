//! `/v1` routes. Each handler parses its body, calls one [`Store`] operation
//! and returns that operation's value as canonical JSON.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use coursegate::registry::ModuleMeta;
use coursegate::workflow::Workflow;
use coursegate::ValidationReport;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::store::{search_query, PlanRequest, RunRequest, Store, TrackRequest};

type Shared = State<Arc<Store>>;
type ApiResult = Result<Response, ApiError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRequest {
    pub stars: i64,
}

pub fn router(store: Arc<Store>) -> Router {
    let v1 = Router::new()
        .route("/modules", get(list_modules).post(register_module))
        .route("/modules/search", get(search_modules))
        .route("/modules/{id}", get(get_module))
        .route("/modules/{id}/ratings", post(rate_module))
        .route("/repo/import", post(import_repository))
        .route("/repo/export", get(export_repository))
        .route("/tracks/check", post(check_track))
        .route("/tracks/plan", post(plan_track))
        .route("/tracks/aggregate", post(aggregate_track))
        .route("/graph", get(graph_dot))
        .route("/workflows", get(list_workflows).post(add_workflow))
        .route("/workflows/{id}/validate", post(validate_workflow))
        .route("/runs", post(submit_run))
        .route("/runs/{id}", get(run_status))
        .route("/runs/{id}/cancel", post(cancel_run))
        .route("/runs/{id}/artifacts/{node}/{port}", get(artifact))
        .fallback(|| async { ApiError::not_found("no such endpoint") });
    Router::new().nest("/v1", v1).with_state(store)
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let body = coursegate::canonical::to_vec(value).expect("API values always serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn ok<T: Serialize>(value: &T) -> ApiResult {
    Ok(json(StatusCode::OK, value))
}

/// Reports with errors answer 422; the body is the report either way.
fn report(r: &ValidationReport) -> ApiResult {
    let status = if r.has_errors() {
        StatusCode::UNPROCESSABLE_ENTITY
    } else {
        StatusCode::OK
    };
    Ok(json(status, r))
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

async fn list_modules(State(store): Shared) -> ApiResult {
    ok(&store.list_modules())
}

async fn register_module(State(store): Shared, body: Bytes) -> ApiResult {
    let meta: ModuleMeta = parse(&body)?;
    let id = store.register_module(meta)?;
    Ok(json(StatusCode::CREATED, &Created { id: id.to_string() }))
}

async fn get_module(State(store): Shared, Path(id): Path<String>) -> ApiResult {
    ok(&store.get_module(&id)?)
}

async fn rate_module(State(store): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let req: RatingRequest = parse(&body)?;
    ok(&store.rate_module(&id, req.stars)?)
}

async fn search_modules(
    State(store): Shared,
    pairs: Result<Query<Vec<(String, String)>>, QueryRejection>,
) -> ApiResult {
    let Query(pairs) = pairs.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let query = search_query(&pairs)?;
    ok(&store.search_modules(&query))
}

async fn import_repository(State(store): Shared, body: Bytes) -> ApiResult {
    ok(&store.import_repository(&body)?)
}

async fn export_repository(State(store): Shared) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        store.export_repository(),
    )
        .into_response()
}

async fn check_track(State(store): Shared, body: Bytes) -> ApiResult {
    let (track, constraints) = parse::<TrackRequest>(&body)?.into_parts();
    report(&store.check_track(&track, constraints.as_ref())?)
}

async fn plan_track(State(store): Shared, body: Bytes) -> ApiResult {
    let req: PlanRequest = parse(&body)?;
    ok(&store.plan_track(&req)?)
}

async fn aggregate_track(State(store): Shared, body: Bytes) -> ApiResult {
    let (track, _) = parse::<TrackRequest>(&body)?.into_parts();
    ok(&store.aggregate_track(&track)?)
}

async fn graph_dot(State(store): Shared) -> ApiResult {
    let dot = store.graph()?.to_dot();
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], dot).into_response())
}

async fn list_workflows(State(store): Shared) -> ApiResult {
    ok(&store.list_workflows())
}

async fn add_workflow(State(store): Shared, body: Bytes) -> ApiResult {
    let wf: Workflow = parse(&body)?;
    let id = store.add_workflow(wf)?;
    Ok(json(StatusCode::CREATED, &Created { id: id.to_string() }))
}

async fn validate_workflow(State(store): Shared, Path(id): Path<String>) -> ApiResult {
    let wf = store.get_workflow(&id)?;
    report(&store.validate_workflow(&wf))
}

async fn submit_run(State(store): Shared, body: Bytes) -> ApiResult {
    let req: RunRequest = parse(&body)?;
    Ok(json(StatusCode::CREATED, &store.submit_run(req)?))
}

async fn run_status(State(store): Shared, Path(id): Path<String>) -> ApiResult {
    ok(&store.run_status(&id)?)
}

async fn cancel_run(State(store): Shared, Path(id): Path<String>) -> ApiResult {
    ok(&store.cancel_run(&id)?)
}

async fn artifact(
    State(store): Shared,
    Path((id, node, port)): Path<(String, String, String)>,
) -> ApiResult {
    let (content_id, bytes) = store.artifact(&id, &node, &port)?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/octet-stream".to_string()),
            (header::ETAG, format!("\"{content_id}\"")),
        ],
        bytes,
    )
        .into_response())
}
