use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use blocklot_core::beacon::{BeaconConfig, BeaconMode, DEFAULT_CONFIRMATION_DEPTH};
use blocklot_core::verification::DEFAULT_Z_MAX;
use blocklot_service::{router, ApiConfig, Service};
use clap::{Parser, ValueEnum};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Live,
    Fixture,
}

/// Lottery API server.
#[derive(Debug, Parser)]
#[command(name = "blocklot-service", version)]
struct Args {
    #[arg(long, env = "BLOCKLOT_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Number of ledger peers; must be odd.
    #[arg(long, env = "BLOCKLOT_PEERS", default_value_t = 3)]
    peers: usize,
    /// Directory for peer logs. Without it the ledger lives in memory.
    #[arg(long, env = "BLOCKLOT_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long, env = "BLOCKLOT_BEACON_MODE", value_enum, default_value = "live")]
    beacon_mode: Mode,
    #[arg(long, env = "BLOCKLOT_BEACON_URL", default_value = blocklot_core::beacon::DEFAULT_BASE_URL)]
    beacon_url: String,
    #[arg(long, env = "BLOCKLOT_BEACON_FIXTURE")]
    beacon_fixture: Option<PathBuf>,
    #[arg(long, env = "BLOCKLOT_CONFIRMATION_DEPTH", default_value_t = DEFAULT_CONFIRMATION_DEPTH)]
    confirmation_depth: u64,
    #[arg(long, env = "BLOCKLOT_Z_MAX", default_value_t = DEFAULT_Z_MAX)]
    z_max: f64,
    /// Refuse a second subscription with the same identity string.
    #[arg(long, env = "BLOCKLOT_STRICT_IDENTITIES")]
    strict_identities: bool,
    /// Extra beacon polls a draw makes while waiting for confirmations.
    #[arg(long, env = "BLOCKLOT_DRAW_POLLS", default_value_t = 2)]
    draw_polls: u32,
    /// Static web client served at /ui.
    #[arg(long, env = "BLOCKLOT_UI_DIR")]
    ui_dir: Option<PathBuf>,
}

impl Args {
    fn into_config(self) -> anyhow::Result<ApiConfig> {
        let beacon = match self.beacon_mode {
            Mode::Live => BeaconConfig::live(self.beacon_url),
            Mode::Fixture => BeaconConfig::fixture(
                self.beacon_fixture
                    .context("--beacon-fixture is required in fixture mode")?,
            ),
        };
        debug_assert!(beacon.mode == BeaconMode::Live || beacon.fixture_path.is_some());
        Ok(ApiConfig {
            listen_address: self.listen,
            peer_count: self.peers,
            beacon,
            confirmation_depth: self.confirmation_depth,
            z_max: self.z_max,
            data_dir: self.data_dir,
            strict_identities: self.strict_identities,
            draw_poll_attempts: self.draw_polls,
            draw_poll_backoff: Duration::from_secs(1),
            ui_dir: self.ui_dir,
            ..ApiConfig::default()
        })
    }
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .init();

    let config = Args::parse().into_config()?;
    let listen = config.listen_address;
    let service = tokio::task::spawn_blocking(move || Service::from_config(config))
        .await?
        .context("starting service")?;
    let app = router(Arc::new(service));

    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .with_context(|| format!("binding {listen}"))?;
    tracing::info!(%listen, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
