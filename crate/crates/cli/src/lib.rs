//! `blocklot` command-line client.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage or
//! precondition error, 3 transport or server error.

pub mod client;
pub mod error;
pub mod offline;

use std::path::PathBuf;
use std::time::Duration;

use blocklot_core::beacon::BeaconConfig;
use blocklot_core::verification::{VerificationReport, DEFAULT_Z_MAX};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use client::ApiClient;
pub use error::{CliError, EXIT_OK, EXIT_VERIFICATION_FAILED};

#[derive(Debug, Parser)]
#[command(name = "blocklot", version, about = "Verifiable lottery client")]
pub struct Cli {
    /// Service base URL.
    #[arg(long, global = true, env = "BLOCKLOT_SERVER", default_value = "http://127.0.0.1:8080")]
    pub server: String,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// HTTP timeout in seconds.
    #[arg(long, global = true, default_value_t = 30)]
    pub timeout: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Register a lottery event.
    Open {
        #[arg(long)]
        name: String,
        /// Announcement date, RFC 3339 (e.g. 2026-06-01T12:00:00Z).
        #[arg(long)]
        date: String,
        #[arg(long)]
        winners: i64,
        /// Blocks after the current tip that seed the draw.
        #[arg(long, default_value_t = 6)]
        offset: i64,
        #[arg(long, default_value = "")]
        note: String,
    },
    /// List all events, or show one.
    Query { event_id: Option<String> },
    Subscribe {
        event_id: String,
        #[arg(long)]
        identity: String,
    },
    Draw {
        event_id: String,
        /// Organizer token returned by `open`.
        #[arg(long)]
        token: String,
    },
    /// Ask whether an identity and token won.
    Check {
        event_id: String,
        #[arg(long)]
        identity: String,
        #[arg(long)]
        token: String,
    },
    /// Ask the service to verify a drawn event.
    Verify { event_id: String },
    /// Z-test the draw over a hash-chained seed schedule, offline.
    Audit {
        /// Exported event file.
        #[arg(long)]
        event: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
        #[arg(long, default_value_t = DEFAULT_Z_MAX)]
        zmax: f64,
        /// Audit seed; defaults to the event id.
        #[arg(long)]
        seed: Option<String>,
        /// Write the per-participant table here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Verify an exported event against a block header without the service.
    VerifyOffline {
        #[arg(long)]
        event: PathBuf,
        /// Header file in fixture format containing the target block.
        #[arg(long)]
        header: PathBuf,
        #[command(flatten)]
        peers: PeerArgs,
    },
    /// Write an event's ledger value, as held by a peer majority.
    Export {
        event_id: String,
        #[arg(long, env = "BLOCKLOT_DATA_DIR")]
        data_dir: PathBuf,
        /// Configured peer count; missing logs count as unavailable.
        #[arg(long)]
        peers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Header fixture tools.
    #[command(subcommand)]
    Fixture(FixtureCommand),
}

#[derive(Debug, Args)]
pub struct PeerArgs {
    /// Ledger data directory; its peer logs feed the majority check.
    #[arg(long)]
    pub peers_dir: Option<PathBuf>,
    /// Configured peer count when some logs are missing.
    #[arg(long, requires = "peers_dir")]
    pub peers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum FixtureCommand {
    /// Recompute every header hash in a fixture file.
    Check { file: PathBuf },
    /// Download headers from an explorer into a fixture file.
    Fetch {
        /// Comma-separated heights.
        #[arg(long, value_delimiter = ',', required = true)]
        heights: Vec<u64>,
        #[arg(long, env = "BLOCKLOT_BEACON_URL", default_value = blocklot_core::beacon::DEFAULT_BASE_URL)]
        url: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// What a command produced: a JSON document, a human rendering, and the exit
/// status.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: Value,
    pub text: String,
    pub exit: u8,
}

impl Output {
    fn ok(json: Value, text: impl Into<String>) -> Self {
        Output {
            json,
            text: text.into(),
            exit: EXIT_OK,
        }
    }
}

fn lines(pairs: &[(&str, &Value)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}: {s}"),
            other => format!("{k}: {other}"),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn report_output(report: &VerificationReport, extra: Option<String>) -> Output {
    let flags = [
        ("seed", report.seed_ok),
        ("event_integrity", report.event_integrity_ok),
        ("winner_recomputation", report.winner_recomputation_ok),
        ("majority", report.majority_ok),
    ];
    let mut text: Vec<String> = flags
        .iter()
        .map(|(n, ok)| format!("{n}: {}", if *ok { "PASS" } else { "FAIL" }))
        .collect();
    for d in &report.details {
        text.push(format!("  {}: {}", d.check, d.message));
    }
    text.extend(extra);
    let passed = report.all_passed();
    text.push(if passed { "VERIFIED" } else { "VERIFICATION FAILED" }.to_string());
    Output {
        json: serde_json::to_value(report).unwrap_or(Value::Null),
        text: text.join("\n"),
        exit: if passed { EXIT_OK } else { EXIT_VERIFICATION_FAILED },
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let api = || ApiClient::new(&cli.server, Duration::from_secs(cli.timeout));
    match &cli.command {
        Command::Open {
            name,
            date,
            winners,
            offset,
            note,
        } => {
            let v = api().post(
                "/events",
                &json!({
                    "name": name,
                    "announcement_date": date,
                    "num_winners": winners,
                    "block_offset": offset,
                    "note": note,
                }),
            )?;
            let text = lines(&[
                ("event_id", &v["event_id"]),
                ("organizer_token", &v["organizer_token"]),
                ("target_height", &v["target_height"]),
                ("open_tx_id", &v["open_tx_id"]),
            ]);
            Ok(Output::ok(v, format!("{text}\nKeep the organizer token; it is shown only once.")))
        }
        Command::Query { event_id } => {
            let v = match event_id {
                Some(id) => api().get(&format!("/events/{id}"), &[])?,
                None => api().get("/events", &[])?,
            };
            let rows: Vec<&Value> = match &v {
                Value::Array(a) => a.iter().collect(),
                one => vec![one],
            };
            let text = rows
                .iter()
                .map(|e| {
                    format!(
                        "{}  {:<10}  {}  winners={} participants={} target={}  {}",
                        e["event_id"].as_str().unwrap_or("?"),
                        e["status"].as_str().unwrap_or("?"),
                        e["announcement_date"].as_str().unwrap_or("?"),
                        e["num_winners"],
                        e["participant_count"],
                        e["target_height"],
                        e["name"].as_str().unwrap_or("")
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::ok(v, if text.is_empty() { "no events".into() } else { text }))
        }
        Command::Subscribe { event_id, identity } => {
            let v = api().post(&format!("/events/{event_id}/subscribe"), &json!({ "identity": identity }))?;
            let text = lines(&[
                ("participant_token", &v["participant_token"]),
                ("digest", &v["digest"]),
                ("subscribe_tx_id", &v["subscribe_tx_id"]),
            ]);
            Ok(Output::ok(v, format!("{text}\nKeep the participant token; it is shown only once.")))
        }
        Command::Draw { event_id, token } => {
            let v = api().post(&format!("/events/{event_id}/draw"), &json!({ "organizer_token": token }))?;
            let winners = v["winner_list"]
                .as_array()
                .map(|w| w.iter().filter_map(Value::as_str).collect::<Vec<_>>().join("\n  "))
                .unwrap_or_default();
            let text = format!(
                "{}\nwinners:\n  {winners}",
                lines(&[
                    ("random_seed", &v["random_seed"]),
                    ("verifiable_random_key", &v["verifiable_random_key"]),
                    ("draw_tx_id", &v["draw_tx_id"]),
                ])
            );
            Ok(Output::ok(v, text))
        }
        Command::Check {
            event_id,
            identity,
            token,
        } => {
            let v = api().get(
                &format!("/events/{event_id}/check"),
                &[("identity", identity), ("token", token)],
            )?;
            let winner = v["winner"]
                .as_bool()
                .ok_or_else(|| CliError::Transport(format!("unexpected reply {v}")))?;
            Ok(Output::ok(v, if winner { "WINNER" } else { "NOT A WINNER" }))
        }
        Command::Verify { event_id } => {
            let v = api().get(&format!("/events/{event_id}/verify"), &[])?;
            let report: VerificationReport = serde_json::from_value(v)
                .map_err(|e| CliError::Transport(format!("unexpected verification reply: {e}")))?;
            Ok(report_output(&report, None))
        }
        Command::Audit {
            event,
            runs,
            zmax,
            seed,
            table,
        } => {
            let report = offline::audit(event, *runs, *zmax, seed.as_deref())?;
            let rendered = report.to_table();
            if let Some(path) = table {
                write_file(path, rendered.as_bytes())?;
            }
            let verdict = format!(
                "{} (max |z| = {}, z_max = {})",
                if report.passed { "PASS" } else { "FAIL" },
                report.max_abs_z().map(|z| format!("{z:.4}")).unwrap_or_else(|| "undefined".into()),
                report.z_max
            );
            Ok(Output {
                json: serde_json::to_value(&report).unwrap_or(Value::Null),
                text: format!("{rendered}{verdict}"),
                exit: if report.passed { EXIT_OK } else { EXIT_VERIFICATION_FAILED },
            })
        }
        Command::VerifyOffline { event, header, peers } => {
            let result = offline::verify_offline(event, header, peers.peers_dir.as_deref(), peers.peers)?;
            let note = (result.replicas == 1 && peers.peers_dir.is_none())
                .then(|| "note: majority checked against the event file only; pass --peers-dir for ledger replicas".to_string());
            Ok(report_output(&result.report, note))
        }
        Command::Export {
            event_id,
            data_dir,
            peers,
            out,
        } => match offline::export(data_dir, event_id, *peers)? {
            Some(bytes) => {
                let text = String::from_utf8_lossy(&bytes).into_owned();
                if let Some(path) = out {
                    write_file(path, &bytes)?;
                }
                let json = json!({ "event_id": event_id, "export": text });
                Ok(Output::ok(json, text.trim_end().to_string()))
            }
            None => Ok(Output {
                json: json!({ "event_id": event_id, "error": "NoMajority" }),
                text: format!("no strict majority of peers agrees on event {event_id}"),
                exit: EXIT_VERIFICATION_FAILED,
            }),
        },
        Command::Fixture(FixtureCommand::Check { file }) => {
            let check = offline::check_fixture(file)?;
            let mismatches: Vec<Value> = check
                .mismatches
                .iter()
                .map(|(h, c, r)| json!({ "height": h, "computed": c, "recorded": r }))
                .collect();
            let mut text: Vec<String> = check
                .mismatches
                .iter()
                .map(|(h, c, r)| format!("height {h}: computed {c}, recorded {r}"))
                .collect();
            text.push(format!("{} headers checked, {} mismatched", check.checked, check.mismatches.len()));
            Ok(Output {
                json: json!({ "checked": check.checked, "mismatches": mismatches }),
                text: text.join("\n"),
                exit: if check.mismatches.is_empty() { EXIT_OK } else { EXIT_VERIFICATION_FAILED },
            })
        }
        Command::Fixture(FixtureCommand::Fetch { heights, url, out }) => {
            let mut config = BeaconConfig::live(url.clone());
            config.request_timeout = Duration::from_secs(cli.timeout);
            let text = offline::fetch_fixture(&config, heights)?;
            write_file(out, text.as_bytes())?;
            Ok(Output::ok(
                json!({ "written": out, "heights": heights }),
                format!("wrote {} headers to {}", heights.len(), out.display()),
            ))
        }
    }
}

/// Runs the command and prints its result; returns the process exit status.
pub fn execute(cli: &Cli) -> u8 {
    match run(cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).unwrap_or_default());
            } else {
                println!("{}", out.text);
            }
            out.exit
        }
        Err(e) => {
            if cli.json {
                println!("{}", e.to_json());
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
