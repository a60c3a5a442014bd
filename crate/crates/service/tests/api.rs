use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use boop_core::record::GameRecord;
use boop_service::{router, SessionManager, SessionView, Status};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn call_raw(app: &Router, uri: &str, body: &str) -> StatusCode {
    let req = Request::builder()
        .method("POST")
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    app.clone().oneshot(req).await.unwrap().status()
}

fn view(v: Value) -> SessionView {
    serde_json::from_value(v).unwrap()
}

#[tokio::test]
async fn scripted_game_reaches_a_winner() {
    let dir = tempfile::tempdir().unwrap();
    let manager = SessionManager::with_records_dir(dir.path().to_path_buf());
    let app = router(manager.clone());
    let (code, body) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"human": "P1", "agent": "heuristic", "seed": 3})),
    )
    .await;
    assert_eq!(code, StatusCode::CREATED);
    let mut v = view(body);
    assert_eq!(v.status, Status::AwaitingHuman);
    assert_eq!(v.legal_moves.len(), 36);
    assert_eq!(v.board.len(), 6);
    assert!(v
        .board
        .iter()
        .all(|r| r.len() == 6 && r.iter().all(Option::is_none)));
    let id = v.id;

    for _ in 0..5000 {
        let (code, body) = match v.status {
            Status::Finished => break,
            Status::AgentThinking => {
                v = manager.wait_idle(id, Duration::from_secs(30)).unwrap();
                continue;
            }
            Status::AwaitingHuman => {
                let mv = v.legal_moves.last().unwrap().clone();
                call(
                    &app,
                    "POST",
                    &format!("/sessions/{id}/move"),
                    Some(json!({"move": mv})),
                )
                .await
            }
            Status::AwaitingHumanDecision => {
                let choice = v.pending_choices[0].clone();
                call(
                    &app,
                    "POST",
                    &format!("/sessions/{id}/decision"),
                    Some(json!({"choice": choice})),
                )
                .await
            }
        };
        assert_eq!(code, StatusCode::OK, "{body}");
        v = view(body);
    }
    assert_eq!(v.status, Status::Finished);
    let winner = v.winner.expect("a finished game has a winner");

    let (code, body) = call(&app, "GET", &format!("/sessions/{id}/record"), None).await;
    assert_eq!(code, StatusCode::OK);
    let record: GameRecord = serde_json::from_value(body).unwrap();
    assert_eq!(record.winner, Some(winner));
    assert!(record.p1.is_none() && record.p2.is_some());
    assert_eq!(record.events, v.history);
    assert_eq!(record.replay().unwrap().game_result(), Some(winner));

    let saved = GameRecord::read(&dir.path().join(format!("{id}.json"))).unwrap();
    assert_eq!(saved, record);

    let (code, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/move"),
        Some(json!({"move": "S@a1"})),
    )
    .await;
    assert_eq!(code, StatusCode::CONFLICT);
}

#[tokio::test]
async fn agent_opens_when_human_is_second() {
    let app = router(SessionManager::new());
    let (code, body) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"human": "P2", "agent": "vanilla", "budget": {"ms": 1500}, "seed": 1})),
    )
    .await;
    assert_eq!(code, StatusCode::CREATED);
    let v = view(body);
    assert_eq!(v.status, Status::AgentThinking);
    assert!(v.thinking);
    assert!(v.legal_moves.is_empty());
    let id = v.id;

    let (code, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/move"),
        Some(json!({"move": "S@a1"})),
    )
    .await;
    assert_eq!(code, StatusCode::CONFLICT);
    assert!(body["error"].as_str().unwrap().contains("thinking"));

    let mut v = v;
    for _ in 0..100 {
        tokio::time::sleep(Duration::from_millis(100)).await;
        let (_, body) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
        v = view(body);
        if v.status != Status::AgentThinking {
            break;
        }
    }
    assert_eq!(v.status, Status::AwaitingHuman);
    assert_eq!(v.ply, 1);
    assert_eq!(v.to_move, boop_core::engine::Player::Two);
    assert!(v.last_agent_move.is_some());
    assert_eq!(v.legal_moves.len(), 35);
}

#[tokio::test]
async fn bad_requests_are_rejected() {
    let app = router(SessionManager::new());
    let (_, body) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"agent": "heuristic"})),
    )
    .await;
    let id = view(body).id;

    let missing = uuid::Uuid::new_v4();
    let (code, _) = call(&app, "GET", &format!("/sessions/{missing}"), None).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    let (code, _) = call(&app, "GET", "/sessions/not-a-uuid", None).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);

    let uri = format!("/sessions/{id}/move");
    let (code, body) = call(&app, "POST", &uri, Some(json!({"move": "Q@z9"}))).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    assert!(body["error"].is_string());
    let (code, _) = call(&app, "POST", &uri, Some(json!({"mv": "S@a1"}))).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    assert_eq!(
        call_raw(&app, &uri, "{not json").await,
        StatusCode::BAD_REQUEST
    );

    let (code, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/decision"),
        Some(json!({"choice": "G@a1"})),
    )
    .await;
    assert_eq!(code, StatusCode::CONFLICT);

    let (code, _) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"agent": "alphazero"})),
    )
    .await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    let (code, _) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"budget": {"ms": 0}})),
    )
    .await;
    assert_eq!(code, StatusCode::BAD_REQUEST);

    let (code, _) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(code, StatusCode::OK);
}

#[tokio::test]
async fn illegal_move_leaves_state_unchanged() {
    let manager = SessionManager::new();
    let app = router(manager.clone());
    let (_, body) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"agent": "heuristic", "seed": 9})),
    )
    .await;
    let id = view(body).id;
    let (code, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/move"),
        Some(json!({"move": "S@c3"})),
    )
    .await;
    assert_eq!(code, StatusCode::OK);
    let _ = body;
    let v = manager.wait_idle(id, Duration::from_secs(30)).unwrap();
    assert_eq!(v.ply, 2);
    let (code, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/move"),
        Some(json!({"move": "L@d4"})),
    )
    .await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    let after = manager.get_state(id).unwrap();
    assert_eq!(after, v);
}

#[test]
fn view_json_shape() {
    let manager = SessionManager::new();
    let v = manager
        .create_session(boop_service::CreateSession {
            agent: Some("heuristic".into()),
            ..Default::default()
        })
        .unwrap();
    let json = serde_json::to_value(&v).unwrap();
    for key in [
        "id",
        "status",
        "human",
        "agent",
        "to_move",
        "phase",
        "ply",
        "board",
        "pools",
        "legal_moves",
        "pending_choices",
        "history",
        "last_agent_move",
        "winner",
        "thinking",
        "error",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["status"], "awaiting_human");
    assert_eq!(json["phase"], "placement");
    assert_eq!(json["pools"]["P1"], json!({"small": 8, "large": 0}));
    assert_eq!(json["agent"], "heuristic");
    let back: SessionView = serde_json::from_value(json).unwrap();
    assert_eq!(back, v);
}
