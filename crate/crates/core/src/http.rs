//! JSON API over [`SessionService`].

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::clock::MonotonicClock;
use crate::config::Config;
use crate::graph::{load_snapshot, ItemId, PersonId, SnapshotError};
use crate::session::{SessionError, SessionService, Step, Token};

#[derive(Clone)]
pub struct AppState {
    pub service: SessionService,
    /// Root for `snapshot_path` requests; `None` disables them.
    pub snapshot_dir: Option<PathBuf>,
}

/// An error rendered as `{code, message, details}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Value,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::UnknownSession => StatusCode::NOT_FOUND,
            SessionError::InvalidSnapshot(_) | SessionError::UnplayableSnapshot { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            SessionError::IllegalTransition(_)
            | SessionError::WrongStep { .. }
            | SessionError::AlreadySelected(_) => StatusCode::CONFLICT,
            SessionError::NotInCurrentPair(_)
            | SessionError::NotInGallery(_)
            | SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::StoreFull => StatusCode::TOO_MANY_REQUESTS,
            SessionError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            code: e.code(),
            message: e.to_string(),
            details: e.details(),
        }
    }
}

impl From<SnapshotError> for ApiError {
    fn from(e: SnapshotError) -> Self {
        Self::bad_request("malformed_snapshot", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self {
            status: e.status(),
            code: "bad_request",
            message: e.body_text(),
            details: Value::Null,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "code": self.code,
            "message": self.message,
            "details": self.details,
        });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    snapshot: Option<Value>,
    snapshot_path: Option<String>,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct CreateResponse {
    token: Token,
    step: Step,
}

#[derive(Debug, Serialize)]
struct StepResponse {
    step: Step,
}

#[derive(Debug, Deserialize)]
struct ChoiceRequest {
    winner: ItemId,
}

#[derive(Debug, Deserialize)]
struct SelectRequest {
    person: PersonId,
}

pub fn router(state: AppState, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/v1/sessions", post(create))
        .route("/api/v1/sessions/{token}", get(session_state))
        .route("/api/v1/sessions/{token}/advance", post(advance))
        .route(
            "/api/v1/sessions/{token}/battle",
            get(battle_pair).post(battle_choice),
        )
        .route("/api/v1/sessions/{token}/round", get(round_view))
        .route("/api/v1/sessions/{token}/round/select", post(round_select))
        .route("/api/v1/sessions/{token}/result", get(result))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn read_snapshot_file(root: Option<&Path>, requested: &str) -> Result<Vec<u8>, ApiError> {
    let root = root.ok_or_else(|| {
        ApiError::bad_request("bad_request", "snapshot_path is disabled on this server")
    })?;
    let not_found = || ApiError::bad_request("bad_request", format!("no snapshot at {requested}"));
    let root = root.canonicalize().map_err(|_| not_found())?;
    let path = root
        .join(requested)
        .canonicalize()
        .map_err(|_| not_found())?;
    if !path.starts_with(&root) {
        return Err(ApiError::bad_request(
            "bad_request",
            "snapshot_path must stay inside the snapshot directory",
        ));
    }
    std::fs::read(&path).map_err(|_| not_found())
}

async fn create(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let Json(req) = body?;
    let bytes = match (req.snapshot, req.snapshot_path) {
        (Some(doc), None) => serde_json::to_vec(&doc).expect("a json value serializes"),
        (None, Some(path)) => read_snapshot_file(state.snapshot_dir.as_deref(), &path)?,
        _ => {
            return Err(ApiError::bad_request(
                "bad_request",
                "give exactly one of snapshot or snapshot_path",
            ))
        }
    };
    let snapshot = load_snapshot(&bytes)?;
    let (token, step) = state.service.create_session(Arc::new(snapshot), req.seed)?;
    Ok((StatusCode::CREATED, Json(CreateResponse { token, step })))
}

async fn session_state(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
) -> ApiResult<crate::session::StateView> {
    Ok(Json(state.service.state(&Token::from(token.as_str()))?))
}

async fn advance(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
) -> ApiResult<StepResponse> {
    let step = state.service.advance(&Token::from(token.as_str()))?;
    Ok(Json(StepResponse { step }))
}

async fn battle_pair(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
) -> ApiResult<crate::session::BattlePairView> {
    Ok(Json(
        state.service.battle_pair(&Token::from(token.as_str()))?,
    ))
}

async fn battle_choice(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
    body: Result<Json<ChoiceRequest>, JsonRejection>,
) -> ApiResult<crate::session::BattleChoiceView> {
    let Json(req) = body?;
    Ok(Json(
        state
            .service
            .battle_choice(&Token::from(token.as_str()), req.winner)?,
    ))
}

async fn round_view(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
) -> ApiResult<crate::session::RoundView> {
    Ok(Json(
        state.service.round_view(&Token::from(token.as_str()))?,
    ))
}

async fn round_select(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
    body: Result<Json<SelectRequest>, JsonRejection>,
) -> ApiResult<crate::session::SelectionView> {
    let Json(req) = body?;
    Ok(Json(
        state
            .service
            .round_select(&Token::from(token.as_str()), req.person)?,
    ))
}

async fn result(
    State(state): State<AppState>,
    UrlPath(token): UrlPath<String>,
) -> ApiResult<crate::feedback::GameReport> {
    Ok(Json(state.service.result(&Token::from(token.as_str()))?))
}

/// Builds the service from `config`, binds, and serves until Ctrl-C.
pub async fn serve(config: Config) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let opts = config.service_options()?;
    let service = SessionService::new(Arc::new(MonotonicClock::new()), opts)?;
    let state = AppState {
        service: service.clone(),
        snapshot_dir: config.snapshot_dir.clone(),
    };
    let app = router(state, config.static_dir.as_deref());

    let purger = tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let dropped = service.purge_expired();
            if dropped > 0 {
                log::info!("purged {dropped} expired sessions");
            }
        }
    });

    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    purger.abort();
    Ok(())
}
