#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use blocklot_core::beacon::{BeaconConfig, BeaconError, BlockRecord, BlockSource, FixtureSource};
use blocklot_core::entropy::SeededEntropy;
use blocklot_core::ledger::{Ledger, LedgerConfig};
use blocklot_service::{router, ApiConfig, ManualClock, Service};
use chrono::{DateTime, TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/headers.csv")
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 5, 1, 9, 0, 0).unwrap()
}

pub const ANNOUNCE: &str = "2026-05-01T12:00:00Z";

pub struct Harness {
    pub service: Arc<Service>,
    pub app: Router,
    pub clock: Arc<ManualClock>,
    pub beacon: Arc<FixtureSource>,
}

/// Beacon that never answers.
pub struct DeadBeacon;

impl BlockSource for DeadBeacon {
    fn latest_height(&self) -> Result<u64, BeaconError> {
        Err(BeaconError::BeaconUnavailable("connection refused".into()))
    }

    fn block(&self, _height: u64) -> Result<BlockRecord, BeaconError> {
        Err(BeaconError::BeaconUnavailable("connection refused".into()))
    }
}

pub fn config(peers: usize) -> ApiConfig {
    ApiConfig {
        peer_count: peers,
        beacon: BeaconConfig::fixture(fixture_path()),
        draw_poll_attempts: 0,
        draw_poll_backoff: Duration::from_millis(1),
        ..ApiConfig::default()
    }
}

pub fn ledger(peers: usize, seed: u64) -> Ledger {
    Ledger::with_entropy(
        LedgerConfig {
            peer_count: peers,
            ..Default::default()
        },
        Arc::new(SeededEntropy::new(seed)),
    )
    .unwrap()
}

/// Fixture beacon with the tip at genesis, three peers, clock at [`t0`].
pub fn harness() -> Harness {
    harness_with(config(3), 7)
}

pub fn harness_with(config: ApiConfig, seed: u64) -> Harness {
    let beacon = Arc::new(FixtureSource::load(fixture_path()).unwrap());
    beacon.set_tip(0);
    let clock = Arc::new(ManualClock::new(t0()));
    let service = Arc::new(
        Service::new(
            config.clone(),
            ledger(config.peer_count, seed),
            beacon.clone(),
            clock.clone(),
            Arc::new(SeededEntropy::new(seed + 1)),
        )
        .unwrap(),
    );
    Harness {
        app: router(service.clone()),
        service,
        clock,
        beacon,
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

pub async fn call_raw(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}
