use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use reu_core::domain::Gamble;
use reu_core::elicit::{DecisionWeightSample, ProbabilityEstimate};
use reu_core::interp::MonotoneCurve;
use reu_core::procedure::ProcedureConfig;
use reu_core::Preference;

use crate::error::{ServiceError, ServiceResult};
use crate::store::{SessionState, SessionStore};

type Shared = State<Arc<SessionStore>>;

/// The `/api/v1` routes, plus static files from `ui_dir` at `/` when given.
pub fn router(store: Arc<SessionStore>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(summary))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/answer", post(answer))
        .route("/sessions/{id}/abort", post(abort))
        .route("/sessions/{id}/results", get(results))
        .route("/sessions/{id}/transcript", get(transcript))
        .with_state(store);
    let app = Router::new().nest("/api/v1", api);
    match ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Runs blocking store work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ServiceResult<T> + Send + 'static) -> ServiceResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Io(std::io::Error::other(e.to_string())))?
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ServiceResult<T> {
    payload.map(|Json(v)| v).map_err(|e| ServiceError::BadRequest(e.body_text()))
}

#[derive(Serialize)]
struct Created {
    id: String,
    procedure: &'static str,
    state: SessionState,
}

async fn create(State(store): Shared, payload: Result<Json<Value>, JsonRejection>) -> ServiceResult<Response> {
    let raw = body(payload)?;
    let config: ProcedureConfig = serde_json::from_value(raw).map_err(|e| {
        let field = if e.to_string().contains("variant") { "procedure" } else { "config" };
        ServiceError::InvalidConfig(vec![reu_core::procedure::FieldIssue {
            field: field.into(),
            message: e.to_string(),
        }])
    })?;
    let procedure = config.name();
    let id = blocking({
        let store = store.clone();
        move || store.create(config)
    })
    .await?;
    let state = store.with(&id, |s| s.state())?;
    Ok((StatusCode::CREATED, Json(Created { id, procedure, state })).into_response())
}

#[derive(Serialize)]
struct Summary {
    id: String,
    procedure: &'static str,
    state: SessionState,
    query_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn summarize(store: &SessionStore, id: &str) -> ServiceResult<Summary> {
    store.with(id, |s| Summary {
        id: s.id().to_string(),
        procedure: s.config().name(),
        state: s.state(),
        query_count: s.entries.len() as u64,
        error: s.manifest.error.clone(),
    })
}

async fn list(State(store): Shared) -> ServiceResult<Json<Vec<Summary>>> {
    store.ids().iter().map(|id| summarize(&store, id)).collect::<ServiceResult<Vec<_>>>().map(Json)
}

async fn summary(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Json<Summary>> {
    summarize(&store, &id).map(Json)
}

#[derive(Serialize)]
#[serde(untagged)]
enum Next {
    Query {
        query_id: u64,
        left: Gamble,
        right: Gamble,
        human_text: String,
    },
    Finished {
        done: bool,
        state: SessionState,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
}

async fn next(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Json<Next>> {
    store
        .with(&id, |s| match &s.pending {
            Some(q) => Next::Query {
                query_id: q.id,
                left: q.left.clone(),
                right: q.right.clone(),
                human_text: q.human_text.clone(),
            },
            None => Next::Finished { done: true, state: s.state(), error: s.manifest.error.clone() },
        })
        .map(Json)
}

#[derive(Deserialize)]
struct AnswerBody {
    query_id: u64,
    answer: Preference,
}

async fn answer(
    State(store): Shared,
    Path(id): Path<String>,
    payload: Result<Json<AnswerBody>, JsonRejection>,
) -> ServiceResult<Json<Value>> {
    let AnswerBody { query_id, answer } = body(payload)?;
    let state = blocking({
        let store = store.clone();
        let id = id.clone();
        move || store.answer(&id, query_id, answer)
    })
    .await?;
    let count = store.with(&id, |s| s.entries.len())?;
    Ok(Json(json!({ "state": state, "query_count": count })))
}

async fn abort(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Json<Value>> {
    let state = blocking(move || store.abort(&id)).await?;
    Ok(Json(json!({ "state": state })))
}

#[derive(Serialize)]
struct Results {
    done: bool,
    state: SessionState,
    procedure: String,
    config_hash: String,
    samples: Vec<DecisionWeightSample>,
    risk_curve: Option<MonotoneCurve>,
    estimates: Vec<ProbabilityEstimate>,
    query_count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

async fn results(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Json<Results>> {
    store
        .with(&id, |s| {
            let r = s.results.clone();
            Results {
                done: s.state() == SessionState::Done,
                state: s.state(),
                procedure: r.procedure,
                config_hash: r.config_hash,
                samples: r.samples,
                risk_curve: r.risk_curve,
                estimates: r.estimates,
                query_count: r.query_count,
                error: s.manifest.error.clone(),
            }
        })
        .map(Json)
}

async fn transcript(State(store): Shared, Path(id): Path<String>) -> ServiceResult<Response> {
    let bytes = store.with(&id, |s| s.transcript_jsonl())??;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], bytes).into_response())
}
