//! Store setup and request helpers for the HTTP tests.

#![allow(dead_code)]

#[path = "../../../core/tests/support/mod.rs"]
pub mod support;

use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use esid_api::{router, AppState};
use esid_core::ensemble::ScenarioDefinition;
use esid_store::Store;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use support::fixtures::{desk_graph, desk_scenario, lockdown};

pub const COLORS: [(&str, &str); 4] = [
    ("blue", "#3b5bdb"),
    ("purple", "#7048e8"),
    ("pink", "#d6336c"),
    ("yellow", "#f59f00"),
];

pub const CASES: &str = "date,county_id,age_group,confirmed,deaths,recovered
2021-03-01,05315,A00-A59,100,10,60
2021-03-01,05315,A60+,40,8,20
2021-03-02,05315,A00-A59,120,11,70
2021-03-02,05315,A60+,45,9,22
";

/// Scenario `i` of the four-card catalog; the first one carries a damping
/// over days 10..30 so that overrides have something to change.
pub fn card_scenario(i: usize, members: u32, num_days: u32) -> ScenarioDefinition {
    let (name, color) = COLORS[i];
    let mut s = desk_scenario(name, members);
    s.name = format!("{name} scenario");
    s.color = color.into();
    s.num_days = num_days;
    s.dampings = match i {
        0 => vec![lockdown(0.5, 10, 30)],
        1 => vec![lockdown(0.3, 5, 40)],
        2 => vec![lockdown(0.7, 20, 60)],
        _ => vec![],
    };
    s
}

/// Store with the desk graph, four scenarios each run once, and case data.
pub fn catalog_store(dir: &std::path::Path, members: u32, num_days: u32) -> Store {
    let mut store = Store::open(dir).unwrap();
    store.import_graph("graph.json", &desk_graph()).unwrap();
    for (i, (name, _)) in COLORS.iter().enumerate() {
        store.put_scenario(card_scenario(i, members, num_days)).unwrap();
        store.execute(name).unwrap();
    }
    store.ingest_cases(CASES.as_bytes()).unwrap();
    store
}

pub fn app(store: Store) -> (AppState, Router) {
    let state = AppState::new(store);
    let app = router(state.clone());
    (state, app)
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, "GET", uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: &str) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(body)).await
}

/// Polls a run until it leaves the queue, returning its final status body.
pub async fn wait_for(app: &Router, run_id: &str) -> Value {
    for _ in 0..6000 {
        let (code, body) = get(app, &format!("/runs/{run_id}/status")).await;
        assert_eq!(code, StatusCode::OK);
        if body["status"] == "done" || body["status"] == "failed" {
            return body;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("run {run_id} did not finish");
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}
