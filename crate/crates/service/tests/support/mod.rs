#![allow(dead_code)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use coursegate::executor::{RunSnapshot, RunStatus};
use coursegate_service::{api, Store};
use http_body_util::BodyExt;
use serde::de::DeserializeOwned;
use serde_json::Value;
use tower::ServiceExt;

pub struct Reply {
    pub status: StatusCode,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn decode<T: DeserializeOwned>(&self) -> T {
        serde_json::from_slice(&self.body)
            .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }

    pub fn code(&self) -> String {
        self.json()["code"].as_str().unwrap_or_default().to_string()
    }
}

pub fn app(dir: &std::path::Path) -> (Router, Arc<Store>) {
    let store = Arc::new(Store::open(dir, Some(2)).unwrap());
    (api::router(store.clone()), store)
}

pub async fn call(app: &Router, method: Method, uri: &str, body: impl Into<Vec<u8>>) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.into()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, body }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, Vec::new()).await
}

pub async fn post(app: &Router, uri: &str, body: impl Into<Vec<u8>>) -> Reply {
    call(app, Method::POST, uri, body).await
}

/// Polls a run until it is final.
pub async fn finished(app: &Router, run_id: &str) -> RunSnapshot {
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let snap: RunSnapshot = get(app, &format!("/v1/runs/{run_id}")).await.decode();
        if snap.status.is_final() {
            return snap;
        }
        assert!(Instant::now() < deadline, "run {run_id} still {:?}", snap.status);
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
}

pub fn succeeded(snap: &RunSnapshot) -> bool {
    snap.status == RunStatus::Succeeded
}
