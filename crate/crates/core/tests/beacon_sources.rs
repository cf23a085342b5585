//! Fixture corpus checks and the live-client contract against a local stub
//! explorer that replays the same fixture.

mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use blocklot_core::beacon::{
    compute_block_hash, fetch_header, fetch_latest_height, BeaconConfig, BeaconError, BlockSource,
    FixtureSource, LiveSource,
};
use sha2::{Digest, Sha256};

/// Double SHA-256 assembled by hand, independent of `BlockHeader::wire_bytes`.
fn oracle_hash(r: &blocklot_core::beacon::FixtureRecord) -> String {
    let h = &r.header;
    let mut raw = Vec::with_capacity(80);
    raw.extend(h.version.to_le_bytes());
    raw.extend(h.previous_hash.0.iter().rev());
    raw.extend(h.merkle_root.0.iter().rev());
    raw.extend(h.timestamp.to_le_bytes());
    raw.extend(h.bits.to_le_bytes());
    raw.extend(h.nonce.to_le_bytes());
    let d = Sha256::digest(Sha256::digest(&raw));
    d.iter().rev().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn every_fixture_header_hashes_to_its_recorded_hash() {
    let src = common::fixture();
    let records: Vec<_> = src.records().collect();
    assert!(records.len() >= 10);
    assert!(records.iter().any(|r| r.header.height == 0));
    for r in records {
        assert_eq!(compute_block_hash(&r.header), r.expected_hash, "height {}", r.header.height);
        assert_eq!(oracle_hash(r), r.expected_hash.to_hex(), "height {}", r.header.height);
    }
}

#[test]
fn consecutive_fixture_blocks_link_by_previous_hash() {
    let src = common::fixture();
    for h in 1..=7u64 {
        assert_eq!(
            src.header(h).unwrap().previous_hash,
            src.block(h - 1).unwrap().hash,
            "height {h}"
        );
    }
}

#[test]
fn fixture_config_reads_file() {
    let config = BeaconConfig::fixture(common::fixture_path());
    assert_eq!(fetch_latest_height(&config).unwrap(), 125_552);
    let g = fetch_header(&config, 0).unwrap();
    assert_eq!((g.timestamp, g.nonce), (1_231_006_505, 2_083_236_893));
    assert!(matches!(
        fetch_header(&config, 125_552 + 5),
        Err(BeaconError::BlockNotYetPublished { .. })
    ));
    let missing = BeaconConfig::fixture("/nonexistent/blocklot.csv");
    assert!(matches!(fetch_latest_height(&missing), Err(BeaconError::BeaconUnavailable(_))));
}

struct Stub {
    base_url: String,
    hits: Arc<AtomicUsize>,
}

/// Minimal HTTP/1.1 explorer serving `/latestblock` and `/rawblock/{height}`.
/// The first `fail_first` requests get a 503.
fn serve(src: FixtureSource, fail_first: usize) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base_url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut line = String::new();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            if reader.read_line(&mut line).is_err() {
                continue;
            }
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).is_err() || h.trim().is_empty() {
                    break;
                }
            }
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let path = line.split_whitespace().nth(1).unwrap_or("/").to_string();
            let (status, body) = if n < fail_first {
                ("503 Service Unavailable", String::new())
            } else if path == "/latestblock" {
                let tip = src.latest_height().unwrap();
                ("200 OK", format!(r#"{{"height":{tip},"hash":"{}"}}"#, src.block(tip).map(|b| b.hash.to_hex()).unwrap_or_default()))
            } else if let Some(h) = path.strip_prefix("/rawblock/") {
                match h.parse::<u64>().ok().and_then(|h| src.block(h).ok()) {
                    Some(b) => (
                        "200 OK",
                        format!(
                            r#"{{"hash":"{}","ver":{},"prev_block":"{}","mrkl_root":"{}","time":{},"bits":{},"nonce":{},"height":{},"n_tx":1}}"#,
                            b.hash, b.header.version, b.header.previous_hash, b.header.merkle_root,
                            b.header.timestamp, b.header.bits, b.header.nonce, b.header.height
                        ),
                    ),
                    None => ("404 Not Found", String::new()),
                }
            } else {
                ("404 Not Found", String::new())
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    Stub { base_url, hits }
}

fn live_config(base_url: &str) -> BeaconConfig {
    BeaconConfig {
        request_timeout: Duration::from_secs(5),
        initial_backoff: Duration::from_millis(10),
        ..BeaconConfig::live(base_url)
    }
}

#[test]
fn live_and_fixture_agree_on_the_same_data() {
    let fixture = common::fixture();
    let stub = serve(common::fixture(), 0);
    let live = LiveSource::new(&live_config(&stub.base_url));

    assert_eq!(live.latest_height().unwrap(), fixture.latest_height().unwrap());
    for r in fixture.records() {
        let h = r.header.height;
        assert_eq!(live.block(h).unwrap(), fixture.block(h).unwrap(), "height {h}");
    }
    let beyond = fixture.latest_height().unwrap() + 5;
    assert_eq!(live.block(beyond), fixture.block(beyond));
    // a height below the tip that the fixture lacks
    assert!(fixture.block(50).is_err());
    assert!(live.block(50).is_err());
}

#[test]
fn live_retries_transient_failures() {
    let stub = serve(common::fixture(), 2);
    let live = LiveSource::new(&live_config(&stub.base_url));
    assert_eq!(live.latest_height().unwrap(), 125_552);
    assert_eq!(stub.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn live_gives_up_after_three_attempts() {
    let stub = serve(common::fixture(), usize::MAX);
    let live = LiveSource::new(&live_config(&stub.base_url));
    assert!(matches!(live.latest_height(), Err(BeaconError::BeaconUnavailable(_))));
    assert_eq!(stub.hits.load(Ordering::SeqCst), 3);
}
