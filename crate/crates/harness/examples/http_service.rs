//! Drives the HTTP API in-process: log in, open voting, submit a ballot
//! and read the live count.

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::Request;
use axum::Router;
use pvv_harness::sim::{credential, voter_id, Sim, SimOptions, CHAIR};
use pvv_service::router;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, path: &str, bearer: Option<&str>, body: Value) -> (u16, Value) {
    let mut req = Request::builder()
        .method(method)
        .uri(path)
        .header("content-type", "application/json");
    if let Some(b) = bearer {
        req = req.header("authorization", format!("Bearer {b}"));
    }
    let body = if body.is_null() { Body::empty() } else { Body::from(body.to_string()) };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status().as_u16();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let sim = Sim::new(SimOptions::default()).unwrap();
    let app = router(Arc::clone(&sim.svc));
    let base = format!("/referenda/{}", sim.rid);

    let login = |who: String| {
        let app = app.clone();
        async move {
            let (_, v) = call(&app, "POST", "/sessions", None, json!({ "credential": who })).await;
            v["id"].as_str().unwrap().to_owned()
        }
    };
    let chair = login(format!("sim:{CHAIR}")).await;
    let (status, _) = call(&app, "POST", &format!("{base}/phase"), Some(&chair), json!({"phase": "VotingOpen"})).await;
    println!("open voting -> {status}");

    let voter = login(credential(&voter_id(1))).await;
    let (status, t) = call(&app, "POST", &format!("{base}/token"), Some(&voter), Value::Null).await;
    println!("token -> {status} {t}");
    let ballot = json!({"token": t["token"], "passphrase": "quiet harbor", "vote": "YES"});
    let (status, r) = call(&app, "POST", &format!("{base}/ballot"), None, ballot.clone()).await;
    println!("ballot -> {status} {r}");
    let (status, r) = call(&app, "POST", &format!("{base}/ballot"), None, ballot).await;
    println!("again -> {status} {r}");

    let (_, count) = call(&app, "GET", &format!("{base}/count"), None, Value::Null).await;
    println!("count {count}");
    let (status, r) = call(&app, "GET", &format!("{base}/tally"), None, Value::Null).await;
    println!("tally while open -> {status} {r}");
}
