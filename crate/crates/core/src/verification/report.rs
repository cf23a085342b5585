use serde::{Deserialize, Serialize};

use crate::beacon::{compute_block_hash, BlockHeader};
use crate::hash::{sha256, Hash32};
use crate::ledger::{strict_majority, PeerResponse};
use crate::lottery::{canonical_serialize, fisher_yates_draw, hmac_sha256, to_export, LotteryEvent, Status};

/// Names used in [`VerificationReport::details`].
pub const CHECKS: [&str; 4] = ["seed", "event_integrity", "winner_recomputation", "majority"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerificationError {
    #[error("event has not been drawn yet")]
    NotDrawn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub check: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed_ok: bool,
    pub event_integrity_ok: bool,
    pub winner_recomputation_ok: bool,
    pub majority_ok: bool,
    pub details: Vec<CheckFailure>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.seed_ok && self.event_integrity_ok && self.winner_recomputation_ok && self.majority_ok
    }
}

struct Collector(Vec<CheckFailure>);

impl Collector {
    fn check(&mut self, name: &str, ok: bool, message: impl FnOnce() -> String) -> bool {
        if !ok {
            self.0.push(CheckFailure {
                check: name.to_string(),
                message: message(),
            });
        }
        ok
    }
}

/// Runs all four checks against a drawn event.
///
/// * seed: the supplied header is the target block and hashes to the stored seed.
/// * event integrity: the verifiable random key recomputed from the event and
///   `initial_random_key` equals the stored key.
/// * winner recomputation: re-running the draw on the member list and seed
///   reproduces the stored winner list.
/// * majority: the value a strict majority of `replicas` reports equals this
///   event's ledger encoding. Crashed peers are [`PeerResponse::Unavailable`].
pub fn verify_event(
    event: &LotteryEvent,
    header: &BlockHeader,
    initial_random_key: &Hash32,
    replicas: &[PeerResponse],
) -> Result<VerificationReport, VerificationError> {
    if event.status != Status::Drawn {
        return Err(VerificationError::NotDrawn);
    }
    let mut c = Collector(Vec::new());

    let seed_ok = match event.random_seed {
        None => c.check("seed", false, || "event has no random seed".into()),
        Some(seed) => {
            let at_target = c.check("seed", header.height == event.target_height, || {
                format!(
                    "header is for height {}, event targets {}",
                    header.height, event.target_height
                )
            });
            let computed = compute_block_hash(header);
            let matches = c.check("seed", computed == seed, || {
                format!("block hash {computed} differs from stored seed {seed}")
            });
            at_target && matches
        }
    };

    let event_integrity_ok = match (event.random_seed, event.verifiable_random_key) {
        (Some(seed), Some(stored)) => {
            let hmac_ok = c.check(
                "event_integrity",
                hmac_sha256(initial_random_key, &seed) == stored.hmac_part,
                || "HMAC part of the verifiable random key does not match".into(),
            );
            let info_ok = c.check(
                "event_integrity",
                sha256(&[&canonical_serialize(event)]) == stored.info_part,
                || "event information hash does not match the verifiable random key".into(),
            );
            hmac_ok && info_ok
        }
        (_, None) => c.check("event_integrity", false, || {
            "event has no verifiable random key".into()
        }),
        (None, Some(_)) => c.check("event_integrity", false, || "event has no random seed".into()),
    };

    let winner_recomputation_ok = match event.random_seed {
        None => c.check("winner_recomputation", false, || "event has no random seed".into()),
        Some(seed) => match fisher_yates_draw(&event.member_list, event.num_winners as usize, &seed) {
            Ok(winners) => c.check("winner_recomputation", winners == event.winner_list, || {
                "recomputed winner list differs from the stored one".into()
            }),
            Err(e) => c.check("winner_recomputation", false, || format!("draw cannot be re-run: {e}")),
        },
    };

    let local = to_export(event);
    let votes: Vec<Option<&PeerResponse>> = replicas
        .iter()
        .map(|r| (*r != PeerResponse::Unavailable).then_some(r))
        .collect();
    let majority_ok = match strict_majority(&votes, replicas.len()) {
        Some(PeerResponse::Value(v)) => c.check("majority", *v == local, || {
            "local copy differs from the value held by a majority of peers".into()
        }),
        Some(_) => c.check("majority", false, || "a majority of peers do not hold the event".into()),
        None => c.check("majority", false, || {
            format!("no value is reported by more than half of {} peers", replicas.len())
        }),
    };

    Ok(VerificationReport {
        seed_ok,
        event_integrity_ok,
        winner_recomputation_ok,
        majority_ok,
        details: c.0,
    })
}
