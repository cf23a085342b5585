//! Client for a blockchain.info-style explorer API.
//!
//! `GET {base}/latestblock` yields `{"height": .., "hash": ..}` and
//! `GET {base}/rawblock/{height}` yields the header fields as
//! `ver`, `prev_block`, `mrkl_root`, `time`, `bits`, `nonce`, `height`, `hash`.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{BeaconConfig, BeaconError, BlockHeader, BlockRecord, BlockSource};
use crate::hash::Hash32;

#[derive(Debug, Deserialize)]
struct LatestBlock {
    height: u64,
}

#[derive(Debug, Deserialize)]
struct RawBlock {
    hash: String,
    ver: i64,
    prev_block: String,
    mrkl_root: String,
    time: u64,
    bits: u64,
    nonce: u64,
    height: u64,
}

impl RawBlock {
    fn into_record(self) -> Result<BlockRecord, String> {
        let small = |name: &str, v: u64| u32::try_from(v).map_err(|_| format!("{name} out of range"));
        let header = BlockHeader {
            // explorers print version as unsigned; the wire field is the same 32 bits
            version: i32::try_from(self.ver)
                .or_else(|_| u32::try_from(self.ver).map(|v| v as i32))
                .map_err(|_| "ver out of range".to_string())?,
            previous_hash: Hash32::from_hex(&self.prev_block).map_err(|e| e.to_string())?,
            merkle_root: Hash32::from_hex(&self.mrkl_root).map_err(|e| e.to_string())?,
            timestamp: small("time", self.time)?,
            bits: small("bits", self.bits)?,
            nonce: small("nonce", self.nonce)?,
            height: self.height,
        };
        Ok(BlockRecord {
            header,
            hash: Hash32::from_hex(&self.hash).map_err(|e| e.to_string())?,
        })
    }
}

#[derive(Debug)]
enum Failure {
    NotFound,
    Retryable(String),
    Fatal(BeaconError),
}

pub struct LiveSource {
    agent: ureq::Agent,
    base_url: String,
    attempts: u32,
    initial_backoff: Duration,
}

impl LiveSource {
    pub fn new(config: &BeaconConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.request_timeout))
            .build()
            .into();
        LiveSource {
            agent,
            base_url: config.base_url.trim_end_matches('/').to_string(),
            attempts: config.retry_attempts.max(1),
            initial_backoff: config.initial_backoff,
        }
    }

    fn get_once<T: DeserializeOwned>(&self, url: &str) -> Result<T, Failure> {
        match self.agent.get(url).call() {
            Ok(mut resp) => resp
                .body_mut()
                .read_json::<T>()
                .map_err(|e| Failure::Fatal(BeaconError::MalformedResponse(format!("{url}: {e}")))),
            Err(ureq::Error::StatusCode(404)) => Err(Failure::NotFound),
            Err(ureq::Error::StatusCode(code)) if code < 500 && code != 429 => Err(Failure::Fatal(
                BeaconError::BeaconUnavailable(format!("{url}: HTTP {code}")),
            )),
            Err(e) => Err(Failure::Retryable(format!("{url}: {e}"))),
        }
    }

    fn get<T: DeserializeOwned>(&self, path: &str) -> Result<Option<T>, BeaconError> {
        let url = format!("{}{}", self.base_url, path);
        let mut backoff = self.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.attempts {
            match self.get_once(&url) {
                Ok(v) => return Ok(Some(v)),
                Err(Failure::NotFound) => return Ok(None),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(msg)) => {
                    log::warn!("beacon request failed (attempt {attempt}/{}): {msg}", self.attempts);
                    last = msg;
                    if attempt < self.attempts {
                        thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(BeaconError::BeaconUnavailable(last))
    }
}

impl BlockSource for LiveSource {
    fn latest_height(&self) -> Result<u64, BeaconError> {
        self.get::<LatestBlock>("/latestblock")?
            .map(|b| b.height)
            .ok_or_else(|| BeaconError::MalformedResponse("/latestblock not found".into()))
    }

    fn block(&self, height: u64) -> Result<BlockRecord, BeaconError> {
        let tip = self.latest_height()?;
        if height > tip {
            return Err(BeaconError::BlockNotYetPublished { height, tip });
        }
        let raw = self
            .get::<RawBlock>(&format!("/rawblock/{height}"))?
            .ok_or(BeaconError::BlockNotYetPublished { height, tip })?;
        let record = raw.into_record().map_err(BeaconError::MalformedResponse)?;
        if record.header.height != height {
            return Err(BeaconError::MalformedResponse(format!(
                "asked for block {height}, got {}",
                record.header.height
            )));
        }
        Ok(record)
    }
}
