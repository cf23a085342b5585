#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use blocklot_core::beacon::{BlockSource, FixtureSource};
use blocklot_core::entropy::SeededEntropy;
use blocklot_core::ledger::{Ledger, LedgerConfig};
use blocklot_core::lottery::{AuthToken, LotteryEvent, OpenContext, OpenParams, DEFAULT_CHANNEL};
use blocklot_core::{BlockHeader, TxId};
use chrono::{DateTime, Duration, TimeZone, Utc};

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/headers.csv")
}

pub fn fixture() -> FixtureSource {
    FixtureSource::load(fixture_path()).unwrap()
}

pub fn genesis() -> BlockHeader {
    fixture().header(0).unwrap()
}

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 5, 1, 9, 0, 0).unwrap()
}

pub struct Drawn {
    pub event: LotteryEvent,
    pub organizer: AuthToken,
    pub participants: Vec<(String, AuthToken)>,
    pub header: BlockHeader,
}

/// Opens, fills and draws an event against the block at `height` of the
/// fixture, entirely in memory.
pub fn drawn_event(seed: u64, participants: usize, winners: u32, height: u64) -> Drawn {
    let entropy = SeededEntropy::new(seed);
    let src = fixture();
    let record = src.block(height).unwrap();
    let (mut event, organizer) = LotteryEvent::open(
        OpenParams {
            name: format!("event-{seed}"),
            announcement_date: t0() + Duration::hours(1),
            num_winners: winners,
            block_offset: 0,
            note: "fuzzed".into(),
        },
        OpenContext {
            latest_height: height,
            now: t0(),
            channel_id: DEFAULT_CHANNEL.into(),
            open_tx_id: TxId::new(format!("open{seed}")),
        },
        &entropy,
    )
    .unwrap();
    let mut people = Vec::new();
    for i in 0..participants {
        let id = format!("user{i}@example.com");
        let token = event
            .subscribe(&id, t0(), TxId::new(format!("sub{seed}-{i}")), &entropy)
            .unwrap();
        people.push((id, token));
    }
    event
        .draw(&organizer, record.hash, t0() + Duration::hours(2), TxId::new(format!("draw{seed}")))
        .unwrap();
    Drawn {
        event,
        organizer,
        participants: people,
        header: record.header,
    }
}

pub fn ledger(n: usize) -> Ledger {
    Ledger::with_entropy(
        LedgerConfig {
            peer_count: n,
            ..Default::default()
        },
        Arc::new(SeededEntropy::new(99)),
    )
    .unwrap()
}
