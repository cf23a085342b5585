//! Commands that work from files alone: no service needed.

use std::fs;
use std::path::{Path, PathBuf};

use blocklot_core::beacon::{compute_block_hash, parse_record, BeaconConfig, FixtureRecord, FixtureSource};
use blocklot_core::ledger::store::{latest_values, read_log};
use blocklot_core::ledger::{strict_majority, PeerResponse};
use blocklot_core::lottery::{parse_export, to_export, LotteryEvent};
use blocklot_core::verification::{
    audit_seed_schedule, run_fairness_trial, verify_event, FairnessReport,
    VerificationReport,
};

use crate::error::CliError;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_event(path: &Path) -> Result<LotteryEvent, CliError> {
    parse_export(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Header records in fixture format; `tip` and `#` lines are skipped.
pub fn load_headers(path: &Path) -> Result<Vec<FixtureRecord>, CliError> {
    let text = String::from_utf8(read(path)?)
        .map_err(|_| CliError::Usage(format!("{} is not UTF-8", path.display())))?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#') && !l.starts_with("tip,"))
        .map(|(i, l)| {
            parse_record(l)
                .map_err(|e| CliError::Usage(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Peer log files in `dir`, in name order.
fn peer_logs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut logs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot list {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "log"))
        .collect();
    logs.sort();
    if logs.is_empty() {
        return Err(CliError::Usage(format!("no peer logs in {}", dir.display())));
    }
    Ok(logs)
}

/// Each peer's latest value for `key`; unreadable logs count as unavailable
/// and `peers` pads the list for peers whose logs are absent.
pub fn peer_responses(dir: &Path, key: &str, peers: Option<usize>) -> Result<Vec<PeerResponse>, CliError> {
    let mut out: Vec<PeerResponse> = peer_logs(dir)?
        .iter()
        .map(|p| match read_log(p) {
            Ok(entries) => match latest_values(&entries).remove(key) {
                Some(v) => PeerResponse::Value(v),
                None => PeerResponse::Missing,
            },
            Err(_) => PeerResponse::Unavailable,
        })
        .collect();
    if let Some(n) = peers {
        if n < out.len() {
            return Err(CliError::Usage(format!("{} peer logs found but --peers is {n}", out.len())));
        }
        out.resize(n, PeerResponse::Unavailable);
    }
    Ok(out)
}

/// The value a strict majority of peers holds for `event_id`.
pub fn export(dir: &Path, event_id: &str, peers: Option<usize>) -> Result<Option<Vec<u8>>, CliError> {
    let responses = peer_responses(dir, event_id, peers)?;
    let votes: Vec<Option<PeerResponse>> = responses
        .iter()
        .map(|r| (*r != PeerResponse::Unavailable).then(|| r.clone()))
        .collect();
    match strict_majority(&votes, responses.len()) {
        Some(PeerResponse::Value(v)) => Ok(Some(v)),
        Some(_) => Err(CliError::Usage(format!("event {event_id} is not on the ledger"))),
        None => Ok(None),
    }
}

pub struct OfflineVerification {
    pub report: VerificationReport,
    /// Replicas consulted for the majority check; 1 means the event file only.
    pub replicas: usize,
}

pub fn verify_offline(
    event_path: &Path,
    header_path: &Path,
    peers_dir: Option<&Path>,
    peers: Option<usize>,
) -> Result<OfflineVerification, CliError> {
    let event = load_event(event_path)?;
    let header = load_headers(header_path)?
        .into_iter()
        .find(|r| r.header.height == event.target_height)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{} has no header for target block {}",
                header_path.display(),
                event.target_height
            ))
        })?
        .header;
    let replicas = match peers_dir {
        Some(dir) => peer_responses(dir, &event.event_id, peers)?,
        None => vec![PeerResponse::Value(to_export(&event))],
    };
    let report = verify_event(&event, &header, &event.initial_random_key, &replicas)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(OfflineVerification {
        report,
        replicas: replicas.len(),
    })
}

pub fn audit(event_path: &Path, runs: usize, z_max: f64, seed: Option<&str>) -> Result<FairnessReport, CliError> {
    let event = load_event(event_path)?;
    let schedule = audit_seed_schedule(seed.unwrap_or(&event.event_id).as_bytes(), runs);
    run_fairness_trial(&event.member_list, event.num_winners as usize, runs, &schedule, z_max)
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub struct FixtureCheck {
    pub checked: usize,
    /// `(height, computed, recorded)` for each mismatch.
    pub mismatches: Vec<(u64, String, String)>,
}

pub fn check_fixture(path: &Path) -> Result<FixtureCheck, CliError> {
    let records = load_headers(path)?;
    let mismatches = records
        .iter()
        .filter_map(|r| {
            let computed = compute_block_hash(&r.header);
            (computed != r.expected_hash)
                .then(|| (r.header.height, computed.to_hex(), r.expected_hash.to_hex()))
        })
        .collect();
    Ok(FixtureCheck {
        checked: records.len(),
        mismatches,
    })
}

/// Downloads headers from a live explorer and renders them as a fixture file.
/// Every header must hash to the hash the explorer reports.
pub fn fetch_fixture(config: &BeaconConfig, heights: &[u64]) -> Result<String, CliError> {
    let source = config.connect().map_err(|e| CliError::Transport(e.to_string()))?;
    let tip = source.latest_height().map_err(|e| CliError::Transport(e.to_string()))?;
    let mut records = Vec::with_capacity(heights.len());
    for &h in heights {
        let block = source.block(h).map_err(|e| CliError::Transport(e.to_string()))?;
        let computed = compute_block_hash(&block.header);
        if computed != block.hash {
            return Err(CliError::Transport(format!(
                "block {h}: explorer hash {} but header hashes to {computed}",
                block.hash
            )));
        }
        records.push(FixtureRecord {
            header: block.header,
            expected_hash: block.hash,
        });
    }
    Ok(FixtureSource::from_records(records, Some(tip)).to_text())
}
