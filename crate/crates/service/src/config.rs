use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use blocklot_core::beacon::{BeaconConfig, DEFAULT_CONFIRMATION_DEPTH};
use blocklot_core::lottery::DEFAULT_CHANNEL;
use blocklot_core::verification::DEFAULT_Z_MAX;

#[derive(Debug, Clone)]
pub struct ApiConfig {
    pub listen_address: SocketAddr,
    /// Odd and at least 1 so that a strict majority always exists.
    pub peer_count: usize,
    pub beacon: BeaconConfig,
    /// Blocks required above the target before a draw may use it.
    pub confirmation_depth: u64,
    pub z_max: f64,
    pub data_dir: Option<PathBuf>,
    pub channel_id: String,
    /// Reject a second subscription from an identical identity string.
    pub strict_identities: bool,
    /// Extra tip polls before a draw gives up on block lag.
    pub draw_poll_attempts: u32,
    pub draw_poll_backoff: Duration,
    pub ui_dir: Option<PathBuf>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            listen_address: SocketAddr::from(([127, 0, 0, 1], 8080)),
            peer_count: 3,
            beacon: BeaconConfig::default(),
            confirmation_depth: DEFAULT_CONFIRMATION_DEPTH,
            z_max: DEFAULT_Z_MAX,
            data_dir: None,
            channel_id: DEFAULT_CHANNEL.to_string(),
            strict_identities: false,
            draw_poll_attempts: 2,
            draw_poll_backoff: Duration::from_secs(1),
            ui_dir: None,
        }
    }
}

impl ApiConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.peer_count == 0 || self.peer_count.is_multiple_of(2) {
            return Err(format!("peer count must be odd and positive, got {}", self.peer_count));
        }
        if self.z_max.is_nan() || self.z_max <= 0.0 {
            return Err("z_max must be positive".into());
        }
        Ok(())
    }
}
