use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use blocklot_core::verification::{FairnessReport, VerificationReport};
use serde::de::DeserializeOwned;
use tower_http::services::ServeDir;
use tower_http::trace::{DefaultMakeSpan, DefaultOnResponse, TraceLayer};
use tracing::Level;

use crate::error::ApiError;
use crate::service::Service;
use crate::views::{
    AuditQuery, CheckQuery, CheckResponse, DrawRequest, DrawResponse, EventView, OpenRequest,
    OpenResponse, SubscribeRequest, SubscribeResponse,
};

type Shared = Arc<Service>;

/// Builds the HTTP API. Static files under `ui_dir` are served at `/ui`.
pub fn router(service: Arc<Service>) -> Router {
    let ui_dir = service.config().ui_dir.clone();
    let mut app = Router::new()
        .route("/events", post(open).get(query))
        .route("/events/{id}", get(event))
        .route("/events/{id}/subscribe", post(subscribe))
        .route("/events/{id}/draw", post(draw))
        .route("/events/{id}/check", get(check))
        .route("/events/{id}/verify", get(verify))
        .route("/events/{id}/audit", get(audit))
        .with_state(service);
    if let Some(dir) = ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app.layer(
        TraceLayer::new_for_http()
            .make_span_with(DefaultMakeSpan::new().level(Level::INFO))
            .on_response(DefaultOnResponse::new().level(Level::INFO)),
    )
}

/// Runs blocking ledger and beacon work off the async executor.
async fn blocking<T, F>(service: Shared, f: F) -> Result<T, ApiError>
where
    F: FnOnce(&Service) -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))?
}

fn body<T: DeserializeOwned>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::InvalidParameter(e.body_text()))
}

fn query_params<T: DeserializeOwned>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v)
        .map_err(|e| ApiError::InvalidParameter(e.body_text()))
}

async fn open(
    State(svc): State<Shared>,
    payload: Result<Json<OpenRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = body(payload)?;
    let out: OpenResponse = blocking(svc, move |s| s.open(req)).await?;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

async fn query(State(svc): State<Shared>) -> Result<Json<Vec<EventView>>, ApiError> {
    Ok(Json(blocking(svc, |s| s.query()).await?))
}

async fn event(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<EventView>, ApiError> {
    Ok(Json(blocking(svc, move |s| s.event(&id)).await?))
}

async fn subscribe(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<SubscribeRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let req = body(payload)?;
    let out: SubscribeResponse = blocking(svc, move |s| s.subscribe(&id, &req.identity)).await?;
    Ok(Json(out).into_response())
}

async fn draw(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<DrawRequest>, JsonRejection>,
) -> Result<Json<DrawResponse>, ApiError> {
    let req = body(payload)?;
    Ok(Json(blocking(svc, move |s| s.draw(&id, &req.organizer_token)).await?))
}

async fn check(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    q: Result<Query<CheckQuery>, QueryRejection>,
) -> Result<Json<CheckResponse>, ApiError> {
    let q = query_params(q)?;
    Ok(Json(blocking(svc, move |s| s.check(&id, &q.identity, &q.token)).await?))
}

async fn verify(
    State(svc): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<VerificationReport>, ApiError> {
    Ok(Json(blocking(svc, move |s| s.verify(&id)).await?))
}

async fn audit(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    q: Result<Query<AuditQuery>, QueryRejection>,
) -> Result<Json<FairnessReport>, ApiError> {
    let q = query_params(q)?;
    Ok(Json(
        blocking(svc, move |s| s.audit(&id, q.runs, q.seed.as_deref())).await?,
    ))
}
