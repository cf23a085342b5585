//! Per-peer log files: one `key<TAB>value_hex<TAB>tx_id<TAB>sequence` line per
//! entry, appended in sequence order.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{LedgerEntry, LedgerError};
use crate::hash::TxId;

pub fn peer_log_path(dir: &Path, peer_id: &str) -> PathBuf {
    dir.join(format!("{peer_id}.log"))
}

pub fn encode_entry(entry: &LedgerEntry) -> String {
    format!(
        "{}\t{}\t{}\t{}\n",
        entry.key,
        hex::encode(&entry.value),
        entry.tx_id,
        entry.sequence
    )
}

fn decode_entry(line: &str, lineno: usize) -> Result<LedgerEntry, LedgerError> {
    let bad = |what: &str| LedgerError::CorruptLog(format!("line {lineno}: {what}"));
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(bad("expected 4 tab-separated fields"));
    }
    Ok(LedgerEntry {
        key: fields[0].to_string(),
        value: hex::decode(fields[1]).map_err(|_| bad("value is not hex"))?,
        tx_id: TxId::new(fields[2]),
        sequence: fields[3].parse().map_err(|_| bad("bad sequence"))?,
    })
}

/// Reads a peer log. A missing file is an empty log.
pub fn read_log(path: &Path) -> Result<Vec<LedgerEntry>, LedgerError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(LedgerError::Io(format!("{}: {e}", path.display()))),
    };
    let mut entries: Vec<LedgerEntry> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let entry = decode_entry(line, i + 1)?;
        if entries.last().is_some_and(|prev| prev.sequence >= entry.sequence) {
            return Err(LedgerError::CorruptLog(format!(
                "{}: sequence {} out of order",
                path.display(),
                entry.sequence
            )));
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Latest value per key from a log.
pub fn latest_values(entries: &[LedgerEntry]) -> BTreeMap<String, Vec<u8>> {
    entries
        .iter()
        .map(|e| (e.key.clone(), e.value.clone()))
        .collect()
}

pub(super) fn open_append(path: &Path) -> Result<File, LedgerError> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| LedgerError::Io(format!("{}: {e}", path.display())))
}

pub(super) fn append(file: &mut File, entry: &LedgerEntry) -> Result<(), LedgerError> {
    file.write_all(encode_entry(entry).as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| LedgerError::Io(e.to_string()))
}
