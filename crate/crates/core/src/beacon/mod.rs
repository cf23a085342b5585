//! Bitcoin randomness beacon.
//!
//! A [`BlockSource`] reports the chain tip and serves block headers together
//! with the block hash the source claims for them. The claimed hash becomes the
//! draw seed; [`verify_seed`] later recomputes it from the header fields.

mod fixture;
mod header;
mod live;

use std::path::PathBuf;
use std::time::Duration;

pub use fixture::{parse_record, FixtureRecord, FixtureSource};
pub use header::{compute_block_hash, verify_seed, BlockHeader};
pub use live::LiveSource;

use crate::hash::Hash32;

pub const ENV_MODE: &str = "BLOCKLOT_BEACON_MODE";
pub const ENV_URL: &str = "BLOCKLOT_BEACON_URL";
pub const ENV_FIXTURE: &str = "BLOCKLOT_BEACON_FIXTURE";
pub const DEFAULT_BASE_URL: &str = "https://blockchain.info";
pub const DEFAULT_CONFIRMATION_DEPTH: u64 = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BeaconError {
    #[error("beacon unavailable: {0}")]
    BeaconUnavailable(String),
    #[error("malformed beacon response: {0}")]
    MalformedResponse(String),
    #[error("block {height} not yet published (tip {tip})")]
    BlockNotYetPublished { height: u64, tip: u64 },
}

/// A header plus the hash its source reported for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRecord {
    pub header: BlockHeader,
    pub hash: Hash32,
}

pub trait BlockSource: Send + Sync {
    fn latest_height(&self) -> Result<u64, BeaconError>;

    /// Fails with [`BeaconError::BlockNotYetPublished`] above the tip.
    fn block(&self, height: u64) -> Result<BlockRecord, BeaconError>;

    fn header(&self, height: u64) -> Result<BlockHeader, BeaconError> {
        self.block(height).map(|r| r.header)
    }
}

impl<T: BlockSource + ?Sized> BlockSource for std::sync::Arc<T> {
    fn latest_height(&self) -> Result<u64, BeaconError> {
        (**self).latest_height()
    }

    fn block(&self, height: u64) -> Result<BlockRecord, BeaconError> {
        (**self).block(height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeaconMode {
    Live,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeaconConfig {
    pub mode: BeaconMode,
    pub base_url: String,
    pub fixture_path: Option<PathBuf>,
    pub request_timeout: Duration,
    pub retry_attempts: u32,
    /// Doubles after each failed attempt.
    pub initial_backoff: Duration,
}

impl Default for BeaconConfig {
    fn default() -> Self {
        BeaconConfig {
            mode: BeaconMode::Live,
            base_url: DEFAULT_BASE_URL.to_string(),
            fixture_path: None,
            request_timeout: Duration::from_secs(10),
            retry_attempts: 3,
            initial_backoff: Duration::from_secs(1),
        }
    }
}

impl BeaconConfig {
    pub fn fixture(path: impl Into<PathBuf>) -> Self {
        BeaconConfig {
            mode: BeaconMode::Fixture,
            fixture_path: Some(path.into()),
            ..Default::default()
        }
    }

    pub fn live(base_url: impl Into<String>) -> Self {
        BeaconConfig {
            base_url: base_url.into(),
            ..Default::default()
        }
    }

    /// Reads `BLOCKLOT_BEACON_MODE` (`live` or `fixture`), `BLOCKLOT_BEACON_URL`
    /// and `BLOCKLOT_BEACON_FIXTURE`.
    pub fn from_env() -> Result<Self, BeaconError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, BeaconError> {
        let mut config = BeaconConfig::default();
        if let Some(url) = get(ENV_URL) {
            config.base_url = url;
        }
        config.fixture_path = get(ENV_FIXTURE).map(PathBuf::from);
        config.mode = match get(ENV_MODE).as_deref().map(str::to_ascii_lowercase).as_deref() {
            None if config.fixture_path.is_some() => BeaconMode::Fixture,
            None | Some("live") => BeaconMode::Live,
            Some("fixture") => BeaconMode::Fixture,
            Some(other) => {
                return Err(BeaconError::MalformedResponse(format!(
                    "{ENV_MODE} must be live or fixture, got {other:?}"
                )))
            }
        };
        if config.mode == BeaconMode::Fixture && config.fixture_path.is_none() {
            return Err(BeaconError::MalformedResponse(format!(
                "{ENV_FIXTURE} is required in fixture mode"
            )));
        }
        Ok(config)
    }

    /// Builds the source this configuration describes. Fixture mode loads the
    /// file eagerly and never touches the network.
    pub fn connect(&self) -> Result<Box<dyn BlockSource>, BeaconError> {
        match self.mode {
            BeaconMode::Fixture => {
                let path = self.fixture_path.as_ref().ok_or_else(|| {
                    BeaconError::MalformedResponse("fixture mode without fixture path".into())
                })?;
                Ok(Box::new(FixtureSource::load(path)?))
            }
            BeaconMode::Live => Ok(Box::new(LiveSource::new(self))),
        }
    }
}

pub fn fetch_latest_height(config: &BeaconConfig) -> Result<u64, BeaconError> {
    config.connect()?.latest_height()
}

pub fn fetch_header(config: &BeaconConfig, height: u64) -> Result<BlockHeader, BeaconError> {
    config.connect()?.header(height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> = pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn env_selects_mode() {
        let c = BeaconConfig::from_lookup(lookup(&[])).unwrap();
        assert_eq!(c.mode, BeaconMode::Live);
        assert_eq!(c.base_url, DEFAULT_BASE_URL);

        let c = BeaconConfig::from_lookup(lookup(&[(ENV_FIXTURE, "/tmp/x.csv")])).unwrap();
        assert_eq!(c.mode, BeaconMode::Fixture);

        let c = BeaconConfig::from_lookup(lookup(&[
            (ENV_MODE, "LIVE"),
            (ENV_URL, "http://localhost:1"),
        ]))
        .unwrap();
        assert_eq!(c.mode, BeaconMode::Live);
        assert_eq!(c.base_url, "http://localhost:1");

        assert!(BeaconConfig::from_lookup(lookup(&[(ENV_MODE, "fixture")])).is_err());
        assert!(BeaconConfig::from_lookup(lookup(&[(ENV_MODE, "carrier-pigeon")])).is_err());
    }
}
