//! Canonical byte format of a [`LotteryEvent`].
//!
//! One `field_name=value` line per field, in [`FIELD_ORDER`]. Lists are
//! comma-joined, binary values are lowercase hex, timestamps are
//! `YYYY-MM-DDTHH:MM:SSZ`, absent values are the literal `UNDEFINED`. Free-text
//! values escape `\` as `\\`, LF as `\n` and CR as `\r`. The verifiable random
//! key is never part of this encoding; the export format appends it as a
//! final `verifiable_random_key=` line.

use chrono::{DateTime, NaiveDateTime, Utc};

use super::{LotteryEvent, ParticipantDigest, Status, VerifiableRandomKey, UNDEFINED};
use crate::hash::{Hash32, TxId};

pub const FIELD_ORDER: [&str; 17] = [
    "event_id",
    "name",
    "announcement_date",
    "num_winners",
    "block_offset",
    "target_height",
    "note",
    "channel_id",
    "open_tx_id",
    "subscribe_tx_ids",
    "draw_tx_id",
    "member_list",
    "winner_list",
    "random_seed",
    "initial_random_key",
    "status",
    "organizer_digest",
];

const KEY_FIELD: &str = "verifiable_random_key";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CodecError {
    pub line: usize,
    pub message: String,
}

pub(crate) fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.format(TIMESTAMP_FORMAT).to_string()
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .ok()
        .map(|n| n.and_utc())
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(v: Option<&T>) -> String {
    v.map(ToString::to_string).unwrap_or_else(|| UNDEFINED.to_string())
}

fn field_values(event: &LotteryEvent) -> [String; 17] {
    [
        escape(&event.event_id),
        escape(&event.name),
        format_timestamp(&event.announcement_date),
        event.num_winners.to_string(),
        event.block_offset.to_string(),
        event.target_height.to_string(),
        escape(&event.note),
        escape(&event.channel_id),
        event.open_tx_id.to_string(),
        join(&event.subscribe_tx_ids),
        opt(event.draw_tx_id.as_ref()),
        join(&event.member_list),
        join(&event.winner_list),
        opt(event.random_seed.as_ref()),
        event.initial_random_key.to_hex(),
        event.status.as_str().to_string(),
        event.organizer_digest.to_hex(),
    ]
}

/// Deterministic encoding hashed into the verifiable random key.
pub fn canonical_serialize(event: &LotteryEvent) -> Vec<u8> {
    let mut out = String::new();
    for (name, value) in FIELD_ORDER.iter().zip(field_values(event)) {
        out.push_str(name);
        out.push('=');
        out.push_str(&value);
        out.push('\n');
    }
    out.into_bytes()
}

/// Canonical encoding followed by the `verifiable_random_key` line. This is
/// both the ledger value and the offline-verification file format.
pub fn to_export(event: &LotteryEvent) -> Vec<u8> {
    let mut out = canonical_serialize(event);
    let key = event
        .verifiable_random_key
        .map(|k| k.to_hex())
        .unwrap_or_else(|| UNDEFINED.to_string());
    out.extend_from_slice(format!("{KEY_FIELD}={key}\n").as_bytes());
    out
}

/// Parses the canonical encoding. The verifiable random key is left unset.
pub fn parse_canonical(bytes: &[u8]) -> Result<LotteryEvent, CodecError> {
    let lines = split_lines(bytes)?;
    if lines.len() != FIELD_ORDER.len() {
        return Err(CodecError {
            line: lines.len(),
            message: format!("expected {} fields, found {}", FIELD_ORDER.len(), lines.len()),
        });
    }
    decode_fields(&lines)
}

/// Parses the export format produced by [`to_export`].
pub fn parse_export(bytes: &[u8]) -> Result<LotteryEvent, CodecError> {
    let lines = split_lines(bytes)?;
    if lines.len() != FIELD_ORDER.len() + 1 {
        return Err(CodecError {
            line: lines.len(),
            message: format!("expected {} lines, found {}", FIELD_ORDER.len() + 1, lines.len()),
        });
    }
    let mut event = decode_fields(&lines[..FIELD_ORDER.len()])?;
    let line = FIELD_ORDER.len() + 1;
    let value = expect_field(lines[FIELD_ORDER.len()], KEY_FIELD, line)?;
    event.verifiable_random_key = if value == UNDEFINED {
        None
    } else {
        Some(VerifiableRandomKey::from_hex(value).map_err(|e| CodecError {
            line,
            message: e.to_string(),
        })?)
    };
    Ok(event)
}

fn split_lines(bytes: &[u8]) -> Result<Vec<&str>, CodecError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CodecError {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    let body = text.strip_suffix('\n').ok_or(CodecError {
        line: 0,
        message: "missing trailing newline".into(),
    })?;
    Ok(body.split('\n').collect())
}

fn expect_field<'a>(line: &'a str, name: &str, lineno: usize) -> Result<&'a str, CodecError> {
    line.strip_prefix(name)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| CodecError {
            line: lineno,
            message: format!("expected field {name:?}"),
        })
}

fn decode_fields(lines: &[&str]) -> Result<LotteryEvent, CodecError> {
    let mut values = Vec::with_capacity(FIELD_ORDER.len());
    for (i, (line, name)) in lines.iter().zip(FIELD_ORDER).enumerate() {
        values.push((i + 1, expect_field(line, name, i + 1)?));
    }
    let err = |line: usize, message: String| CodecError { line, message };
    let text = |(line, v): (usize, &str)| {
        unescape(v).ok_or_else(|| err(line, "invalid escape sequence".into()))
    };
    let number = |(line, v): (usize, &str)| {
        v.parse::<u64>()
            .map_err(|e| err(line, format!("invalid integer {v:?}: {e}")))
    };
    let hash = |(line, v): (usize, &str)| {
        Hash32::from_hex(v).map_err(|e| err(line, e.to_string()))
    };
    let opt_hash = |(line, v): (usize, &str)| {
        if v == UNDEFINED {
            Ok(None)
        } else {
            hash((line, v)).map(Some)
        }
    };
    let digests = |(line, v): (usize, &str)| -> Result<Vec<ParticipantDigest>, CodecError> {
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|d| hash((line, d)).map(ParticipantDigest))
            .collect()
    };
    let tx_list = |(_, v): (usize, &str)| -> Vec<TxId> {
        if v.is_empty() {
            Vec::new()
        } else {
            v.split(',').map(TxId::new).collect()
        }
    };

    let v = &values;
    let num_winners = number(v[3])?;
    let event = LotteryEvent {
        event_id: text(v[0])?,
        name: text(v[1])?,
        announcement_date: parse_timestamp(v[2].1)
            .ok_or_else(|| err(v[2].0, format!("invalid timestamp {:?}", v[2].1)))?,
        num_winners: u32::try_from(num_winners)
            .map_err(|_| err(v[3].0, "num_winners out of range".into()))?,
        block_offset: number(v[4])?,
        target_height: number(v[5])?,
        note: text(v[6])?,
        channel_id: text(v[7])?,
        open_tx_id: TxId::new(v[8].1),
        subscribe_tx_ids: tx_list(v[9]),
        draw_tx_id: (v[10].1 != UNDEFINED).then(|| TxId::new(v[10].1)),
        member_list: digests(v[11])?,
        winner_list: digests(v[12])?,
        verifiable_random_key: None,
        random_seed: opt_hash(v[13])?,
        initial_random_key: hash(v[14])?,
        status: Status::parse(v[15].1)
            .ok_or_else(|| err(v[15].0, format!("unknown status {:?}", v[15].1)))?,
        organizer_digest: hash(v[16])?,
    };
    Ok(event)
}
