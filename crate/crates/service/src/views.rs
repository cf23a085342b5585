//! JSON bodies. Field names are the snake_case type fields; binary values are
//! lowercase hex; timestamps are ISO-8601 UTC.

use blocklot_core::lottery::{LotteryEvent, ParticipantDigest, VerifiableRandomKey};
use blocklot_core::{Hash32, TxId};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub fn iso(ts: &DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpenRequest {
    pub name: String,
    pub announcement_date: String,
    pub num_winners: i64,
    pub block_offset: i64,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenResponse {
    pub event_id: String,
    pub organizer_token: String,
    pub target_height: u64,
    pub open_tx_id: TxId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubscribeRequest {
    pub identity: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubscribeResponse {
    pub event_id: String,
    pub participant_token: String,
    pub digest: ParticipantDigest,
    pub subscribe_tx_id: TxId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrawRequest {
    pub organizer_token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawResponse {
    pub event_id: String,
    pub winner_list: Vec<ParticipantDigest>,
    pub verifiable_random_key: VerifiableRandomKey,
    pub random_seed: Hash32,
    pub draw_tx_id: TxId,
    pub target_height: u64,
}

impl DrawResponse {
    pub fn from_event(e: &LotteryEvent) -> Option<Self> {
        Some(DrawResponse {
            event_id: e.event_id.clone(),
            winner_list: e.winner_list.clone(),
            verifiable_random_key: e.verifiable_random_key?,
            random_seed: e.random_seed?,
            draw_tx_id: e.draw_tx_id.clone()?,
            target_height: e.target_height,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckQuery {
    pub identity: String,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResponse {
    pub winner: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AuditQuery {
    pub runs: Option<usize>,
    /// Audit seed string; defaults to the event id.
    pub seed: Option<String>,
}

/// Public view of an event: no tokens, no initial random key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventView {
    pub event_id: String,
    pub name: String,
    pub announcement_date: String,
    pub num_winners: u32,
    pub block_offset: u64,
    pub target_height: u64,
    pub note: String,
    pub channel_id: String,
    pub open_tx_id: TxId,
    pub subscribe_tx_ids: Vec<TxId>,
    pub draw_tx_id: Option<TxId>,
    pub member_list: Vec<ParticipantDigest>,
    pub winner_list: Vec<ParticipantDigest>,
    pub verifiable_random_key: Option<VerifiableRandomKey>,
    pub random_seed: Option<Hash32>,
    pub status: String,
    pub participant_count: usize,
    /// Server clock has reached the announcement date.
    pub date_reached: bool,
    /// Beacon tip covers the target block plus confirmation depth; `None` when
    /// the beacon could not be asked.
    pub block_reached: Option<bool>,
}

impl EventView {
    pub fn new(e: &LotteryEvent, now: DateTime<Utc>, block_reached: Option<bool>) -> Self {
        EventView {
            event_id: e.event_id.clone(),
            name: e.name.clone(),
            announcement_date: iso(&e.announcement_date),
            num_winners: e.num_winners,
            block_offset: e.block_offset,
            target_height: e.target_height,
            note: e.note.clone(),
            channel_id: e.channel_id.clone(),
            open_tx_id: e.open_tx_id.clone(),
            subscribe_tx_ids: e.subscribe_tx_ids.clone(),
            draw_tx_id: e.draw_tx_id.clone(),
            member_list: e.member_list.clone(),
            winner_list: e.winner_list.clone(),
            verifiable_random_key: e.verifiable_random_key,
            random_seed: e.random_seed,
            status: e.status.as_str().to_string(),
            participant_count: e.participant_count(),
            date_reached: now >= e.announcement_date,
            block_reached,
        }
    }
}
