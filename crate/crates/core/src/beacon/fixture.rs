//! Offline block source backed by a CSV file.
//!
//! ```text
//! # comment
//! tip,<height>
//! height,version,previous_hash_hex,merkle_root_hex,timestamp,bits,nonce,expected_hash_hex
//! ```
//!
//! `bits` accepts decimal or `0x`-prefixed hex. A height may repeat only with
//! identical data. The `tip` line is what [`BlockSource::latest_height`]
//! reports; without it the fixture cannot answer tip queries.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::RwLock;

use super::{BeaconError, BlockHeader, BlockRecord, BlockSource};
use crate::hash::Hash32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureRecord {
    pub header: BlockHeader,
    pub expected_hash: Hash32,
}

impl FixtureRecord {
    pub fn to_line(&self) -> String {
        let h = &self.header;
        format!(
            "{},{},{},{},{},0x{:08x},{},{}",
            h.height, h.version, h.previous_hash, h.merkle_root, h.timestamp, h.bits, h.nonce,
            self.expected_hash
        )
    }
}

#[derive(Debug)]
pub struct FixtureSource {
    records: BTreeMap<u64, FixtureRecord>,
    tip: RwLock<Option<u64>>,
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> BeaconError {
    BeaconError::MalformedResponse(format!("fixture line {line}: {msg}"))
}

fn parse_u32(s: &str) -> Option<u32> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u32::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// Parses one eight-field record line.
pub fn parse_record(line: &str) -> Result<FixtureRecord, String> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != 8 {
        return Err(format!("expected 8 fields, found {}", f.len()));
    }
    let hash = |s: &str| Hash32::from_hex(s).map_err(|e| e.to_string());
    let header = BlockHeader {
        height: f[0].parse().map_err(|_| format!("bad height {:?}", f[0]))?,
        version: f[1].parse().map_err(|_| format!("bad version {:?}", f[1]))?,
        previous_hash: hash(f[2])?,
        merkle_root: hash(f[3])?,
        timestamp: parse_u32(f[4]).ok_or_else(|| format!("bad timestamp {:?}", f[4]))?,
        bits: parse_u32(f[5]).ok_or_else(|| format!("bad bits {:?}", f[5]))?,
        nonce: parse_u32(f[6]).ok_or_else(|| format!("bad nonce {:?}", f[6]))?,
    };
    Ok(FixtureRecord {
        header,
        expected_hash: hash(f[7])?,
    })
}

impl FixtureSource {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BeaconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            BeaconError::BeaconUnavailable(format!("cannot read fixture {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, BeaconError> {
        let mut records = BTreeMap::new();
        let mut tip = None;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("tip,") {
                if tip.is_some() {
                    return Err(malformed(lineno, "duplicate tip record"));
                }
                tip = Some(rest.trim().parse().map_err(|_| malformed(lineno, "bad tip height"))?);
                continue;
            }
            let record = parse_record(line).map_err(|e| malformed(lineno, e))?;
            match records.get(&record.header.height) {
                Some(existing) if *existing != record => {
                    return Err(malformed(
                        lineno,
                        format!("conflicting records for height {}", record.header.height),
                    ))
                }
                _ => {
                    records.insert(record.header.height, record);
                }
            }
        }
        Ok(FixtureSource {
            records,
            tip: RwLock::new(tip),
        })
    }

    pub fn from_records(records: impl IntoIterator<Item = FixtureRecord>, tip: Option<u64>) -> Self {
        FixtureSource {
            records: records.into_iter().map(|r| (r.header.height, r)).collect(),
            tip: RwLock::new(tip),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = &FixtureRecord> {
        self.records.values()
    }

    /// Moves the reported tip, simulating chain growth.
    pub fn set_tip(&self, height: u64) {
        *self.tip.write().expect("tip lock poisoned") = Some(height);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(tip) = *self.tip.read().expect("tip lock poisoned") {
            out.push_str(&format!("tip,{tip}\n"));
        }
        for r in self.records.values() {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }
}

impl BlockSource for FixtureSource {
    fn latest_height(&self) -> Result<u64, BeaconError> {
        self.tip
            .read()
            .expect("tip lock poisoned")
            .ok_or_else(|| BeaconError::MalformedResponse("fixture has no tip record".into()))
    }

    fn block(&self, height: u64) -> Result<BlockRecord, BeaconError> {
        let tip = self.latest_height()?;
        if height > tip {
            return Err(BeaconError::BlockNotYetPublished { height, tip });
        }
        self.records
            .get(&height)
            .map(|r| BlockRecord {
                header: r.header,
                hash: r.expected_hash,
            })
            .ok_or_else(|| BeaconError::MalformedResponse(format!("fixture lacks block {height}")))
    }
}
