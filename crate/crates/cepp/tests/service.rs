use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cepp::formats::ipcg_to_doc;
use cepp::service::{router, AppState, ServiceConfig};
use cepp_core::fixtures;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn app() -> Router {
    let state = AppState::load(&ServiceConfig::default()).unwrap();
    router(Arc::new(state))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn invoicing_session() -> String {
    json!({ "ipcg": ipcg_to_doc(&fixtures::invoicing()), "catalog_id": "aws_t2" }).to_string()
}

async fn create(app: &Router) -> String {
    let (status, body) = call(app, "POST", "/sessions", Some(invoicing_session())).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn health_and_listings() {
    let app = app();
    assert_eq!(call(&app, "GET", "/healthz", None).await, (StatusCode::OK, json!({"status": "ok"})));
    assert_eq!(call(&app, "GET", "/catalogs", None).await.1, json!(["aws_t2", "example1"]));
    assert_eq!(call(&app, "GET", "/regions", None).await.1, json!([]));
}

#[tokio::test]
async fn invoicing_loop_reaches_seven_ninety_seven() {
    let app = app();
    let (status, body) = call(&app, "POST", "/sessions", Some(invoicing_session())).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["cost_eur_mo"], 15.94);
    assert_eq!(body["validation"]["correct"], true);
    let id = body["session_id"].as_str().unwrap().to_string();

    let mut applied = 0;
    loop {
        let (status, props) = call(&app, "GET", &format!("/sessions/{id}/proposals"), None).await;
        assert_eq!(status, StatusCode::OK);
        let Some(first) = props.as_array().unwrap().first().cloned() else { break };
        for p in props.as_array().unwrap() {
            assert!(p["cost_after_eur"].as_f64() <= p["cost_before_eur"].as_f64());
            assert!(["COMBINE_NEIGHBORS", "ROUTER_TO_ROUTING_SLIP"].contains(&p["rule"].as_str().unwrap()));
        }
        let pid = first["id"].as_str().unwrap();
        let (status, res) = call(&app, "POST", &format!("/sessions/{id}/apply"), Some(json!({ "proposal_id": pid }).to_string())).await;
        assert_eq!(status, StatusCode::OK, "{res}");
        assert_eq!(res["validation"]["correct"], true);
        applied += 1;
        assert!(applied < 10);
    }
    let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(state["cost_eur_mo"], 7.97);
    assert_eq!(state["graph"]["nodes"].as_array().unwrap().len(), 13);
    assert_eq!(state["history"].as_array().unwrap().len(), applied + 1);
}

#[tokio::test]
async fn stale_and_unknown_proposals() {
    let app = app();
    let id = create(&app).await;
    let (_, props) = call(&app, "GET", &format!("/sessions/{id}/proposals"), None).await;
    let ids: Vec<String> = props.as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap().to_string()).collect();
    assert!(ids.len() >= 2);
    let apply = |pid: &str| json!({ "proposal_id": pid }).to_string();
    assert_eq!(call(&app, "POST", &format!("/sessions/{id}/apply"), Some(apply(&ids[0]))).await.0, StatusCode::OK);
    assert_eq!(call(&app, "POST", &format!("/sessions/{id}/apply"), Some(apply(&ids[1]))).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", &format!("/sessions/{id}/apply"), Some(apply("r1-p99"))).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "POST", &format!("/sessions/{id}/apply"), Some(apply("junk"))).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "GET", "/sessions/s999", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn preview_returns_graphs() {
    let app = app();
    let id = create(&app).await;
    let (_, props) = call(&app, "GET", &format!("/sessions/{id}/proposals"), None).await;
    let pid = props[0]["id"].as_str().unwrap();
    let (status, body) = call(&app, "GET", &format!("/sessions/{id}/proposals/{pid}/preview"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["graphs"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn create_errors() {
    let app = app();
    assert_eq!(call(&app, "POST", "/sessions", Some("{not json".into())).await.0, StatusCode::BAD_REQUEST);
    let unknown = json!({ "ipcg": ipcg_to_doc(&fixtures::invoicing()), "catalog_id": "nope" }).to_string();
    assert_eq!(call(&app, "POST", "/sessions", Some(unknown)).await.0, StatusCode::NOT_FOUND);
    let region = json!({ "ipcg": ipcg_to_doc(&fixtures::invoicing()), "catalog_id": "aws_t2", "region": "mars" }).to_string();
    assert_eq!(call(&app, "POST", "/sessions", Some(region)).await.0, StatusCode::NOT_FOUND);
}

fn broken_doc() -> Value {
    // Dropping the end node leaves the last processor dangling.
    let mut doc = serde_json::to_value(ipcg_to_doc(&fixtures::enricher_run())).unwrap();
    doc["nodes"].as_array_mut().unwrap().retain(|n| n["id"] != "e");
    doc["edges"].as_array_mut().unwrap().retain(|e| e[1] != "e");
    doc
}

#[tokio::test]
async fn invalid_graph_creates_session_without_cost() {
    let app = app();
    let body = json!({ "ipcg": broken_doc(), "catalog_id": "aws_t2" }).to_string();
    let (status, res) = call(&app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{res}");
    assert_eq!(res["validation"]["correct"], false);
    assert_eq!(res["cost_eur_mo"], Value::Null);
    let id = res["session_id"].as_str().unwrap();
    let (status, props) = call(&app, "GET", &format!("/sessions/{id}/proposals"), None).await;
    assert_eq!((status, props), (StatusCode::OK, json!([])));
}

#[tokio::test]
async fn graph_replacement() {
    let app = app();
    let id = create(&app).await;
    let uri = format!("/sessions/{id}/graph");
    let (status, res) = call(&app, "POST", &uri, Some(json!({ "ipcg": broken_doc() }).to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(res["revision"], 0);
    let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(state["cost_eur_mo"], 15.94);

    assert_eq!(call(&app, "POST", &uri, Some("[]".into())).await.0, StatusCode::BAD_REQUEST);

    let run = json!({ "ipcg": ipcg_to_doc(&fixtures::enricher_run()) }).to_string();
    let (status, res) = call(&app, "POST", &uri, Some(run)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(res["revision"], 1);
    assert_eq!(res["cost_eur_mo"], 7.97);
}

#[tokio::test]
async fn regions_price_marginally_and_sessions_persist() {
    let dir = tempfile::tempdir().unwrap();
    let workloads = dir.path().join("workloads");
    std::fs::create_dir(&workloads).unwrap();
    std::fs::write(
        workloads.join("eu.workload.json"),
        r#"{"items": [{"id": "bg", "cap_mb": 900, "tenant": "other", "shareable": true}]}"#,
    )
    .unwrap();
    let sessions = dir.path().join("sessions");
    let cfg = ServiceConfig {
        catalog_dir: Some(fixture_dir().join("catalogs")),
        workload_dir: Some(workloads),
        session_dir: Some(sessions.clone()),
        ..ServiceConfig::default()
    };
    let state = AppState::load(&cfg).unwrap();
    state.check_regions().unwrap();
    let app = router(Arc::new(state));
    assert_eq!(call(&app, "GET", "/regions", None).await.1, json!(["eu"]));
    assert_eq!(call(&app, "GET", "/catalogs", None).await.1, json!(["aws_t2", "example1", "multicloud"]));

    let body = json!({ "ipcg": ipcg_to_doc(&fixtures::enricher_run()), "catalog_id": "aws_t2", "region": "eu" }).to_string();
    let (status, res) = call(&app, "POST", "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED);
    // With background: one small at 15.94; without: one micro at 7.97.
    assert_eq!(res["cost_eur_mo"], 7.97);
    let id = res["session_id"].as_str().unwrap();
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(sessions.join(format!("{id}.json"))).unwrap()).unwrap();
    assert_eq!(saved["region"], "eu");
    assert_eq!(saved["revision"], 0);
}

#[tokio::test]
async fn edit_matching_a_proposal_prices_like_applying_it() {
    let app = app();
    let a = create(&app).await;
    let b = create(&app).await;
    let (_, props) = call(&app, "GET", &format!("/sessions/{a}/proposals"), None).await;
    let pid = props[0]["id"].as_str().unwrap().to_string();
    let (_, preview) = call(&app, "GET", &format!("/sessions/{a}/proposals/{pid}/preview"), None).await;
    let (_, applied) = call(&app, "POST", &format!("/sessions/{a}/apply"), Some(json!({ "proposal_id": pid }).to_string())).await;
    let edit = json!({ "ipcg": preview["graphs"][0] }).to_string();
    let (status, edited) = call(&app, "POST", &format!("/sessions/{b}/graph"), Some(edit)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(edited["cost_eur_mo"], applied["new_cost"]);
    assert_eq!(applied["graph"], preview["graphs"][0]);
}

#[tokio::test]
async fn unknown_path_is_404() {
    assert_eq!(call(&app(), "GET", "/nope", None).await.0, StatusCode::NOT_FOUND);
}
