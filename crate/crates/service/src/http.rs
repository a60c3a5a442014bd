//! HTTP routes.
//!
//! | method | path                      | body                | response      |
//! |--------|---------------------------|---------------------|---------------|
//! | POST   | `/sessions`               | `CreateSession`     | `SessionView` |
//! | GET    | `/sessions/{id}`          |                     | `SessionView` |
//! | POST   | `/sessions/{id}/move`     | `{"move": "S@c3"}`  | `SessionView` |
//! | POST   | `/sessions/{id}/decision` | `{"choice": "G@b2"}`| `SessionView` |
//! | GET    | `/sessions/{id}/record`   |                     | game record   |
//!
//! Errors are `{"error": "..."}` with 400 (bad input or illegal action), 404 (unknown session)
//! or 409 (wrong time: the agent is thinking, the game is over, or another action is expected).

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use uuid::Uuid;

use crate::session::{CreateSession, ServiceError, SessionManager};
use crate::view::{DecisionRequest, ErrorBody, MoveRequest};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let code = match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
        };
        (
            code,
            Json(ErrorBody {
                error: self.to_string(),
            }),
        )
            .into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(t)| t)
        .map_err(|e| ServiceError::BadRequest(e.body_text()))
}

fn session_id(raw: &str) -> Result<Uuid, ServiceError> {
    raw.parse()
        .map_err(|_| ServiceError::BadRequest(format!("invalid session id {raw:?}")))
}

async fn create(
    State(m): State<SessionManager>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let view = m.create_session(body(payload)?)?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn state(
    State(m): State<SessionManager>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(Json(m.get_state(session_id(&id)?)?).into_response())
}

async fn play(
    State(m): State<SessionManager>,
    Path(id): Path<String>,
    payload: Result<Json<MoveRequest>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let req = body(payload)?;
    Ok(Json(m.submit_move(session_id(&id)?, &req.mv)?).into_response())
}

async fn decide(
    State(m): State<SessionManager>,
    Path(id): Path<String>,
    payload: Result<Json<DecisionRequest>, JsonRejection>,
) -> Result<Response, ServiceError> {
    let req = body(payload)?;
    Ok(Json(m.submit_decision(session_id(&id)?, &req.choice)?).into_response())
}

async fn record(
    State(m): State<SessionManager>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(Json(m.get_record(session_id(&id)?)?).into_response())
}

pub fn router(manager: SessionManager) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(state))
        .route("/sessions/{id}/move", post(play))
        .route("/sessions/{id}/decision", post(decide))
        .route("/sessions/{id}/record", get(record))
        .with_state(manager)
}

/// Serves the API until the process is stopped.
pub async fn serve(addr: std::net::SocketAddr, manager: SessionManager) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(manager)).await
}
