//! In-process HTTP client over the router, plus dataset helpers.
#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use yeargraph_core::ingest::parse_reader;
use yeargraph_core::{build_graph, PropertyGraph, SyntheticSpec};
use yeargraph_server::{app, AppState, ManualClock, Registry, DEFAULT_TTL};

pub struct Response {
    pub status: StatusCode,
    pub body: Vec<u8>,
}

impl Response {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.text()))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }

    pub fn error_code(&self) -> String {
        self.json()["error"]["code"].as_str().unwrap_or_default().to_string()
    }
}

#[derive(Clone)]
pub struct Client {
    pub app: Router,
    pub clock: Arc<ManualClock>,
}

impl Client {
    pub fn new(registry: Registry) -> Self {
        let clock = Arc::new(ManualClock::default());
        let state = AppState::new(registry, DEFAULT_TTL, clock.clone());
        Client {
            app: app(state, None),
            clock,
        }
    }

    pub async fn send(&self, req: Request<Body>) -> Response {
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let body = res.into_body().collect().await.unwrap().to_bytes().to_vec();
        Response { status, body }
    }

    pub async fn get(&self, uri: &str) -> Response {
        self.send(Request::get(uri).body(Body::empty()).unwrap()).await
    }

    pub async fn post_raw(&self, uri: &str, body: &str) -> Response {
        self.send(
            Request::post(uri)
                .header("content-type", "application/json")
                .body(Body::from(body.to_string()))
                .unwrap(),
        )
        .await
    }

    pub async fn post(&self, uri: &str, body: Value) -> Response {
        self.post_raw(uri, &body.to_string()).await
    }
}

pub fn graph_from_spec(spec: &SyntheticSpec) -> PropertyGraph {
    let tables = spec.generate().unwrap();
    let cfg = spec.ingest_config();
    let snaps: Vec<_> = tables
        .iter()
        .map(|(y, t)| parse_reader(t.as_bytes(), Path::new(&SyntheticSpec::file_name(*y)), *y, &cfg).unwrap())
        .collect();
    build_graph(&snaps, &cfg).unwrap()
}

/// Client-side mirror of node positions. Payload floats have six decimals, so
/// equal parsed values mean equal payload text.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Positions(pub std::collections::BTreeMap<String, (f64, f64)>);

impl Positions {
    pub fn from_nodes(nodes: &Value) -> Self {
        let mut p = Positions::default();
        p.apply(nodes);
        p
    }

    /// Applies `[{id, x, y, ...}]`.
    pub fn apply(&mut self, items: &Value) {
        for n in items.as_array().unwrap() {
            self.0.insert(
                n["id"].as_str().unwrap().to_string(),
                (n["x"].as_f64().unwrap(), n["y"].as_f64().unwrap()),
            );
        }
    }

    pub fn xy(&self, id: &str) -> (f64, f64) {
        self.0[id]
    }

    pub fn distance(&self, a: &str, b: &str) -> f64 {
        let ((ax, ay), (bx, by)) = (self.xy(a), self.xy(b));
        ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
    }
}
