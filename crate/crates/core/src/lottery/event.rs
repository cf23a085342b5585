use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use super::{
    derive_verifiable_key, fisher_yates_draw, AuthToken, LotteryError, ParticipantDigest,
    VerifiableRandomKey,
};
use crate::entropy::{self, EntropySource};
use crate::hash::{sha256, Hash32, TxId};

pub const DEFAULT_CHANNEL: &str = "blocklot";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Registered,
    Drawn,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Registered => "REGISTERED",
            Status::Drawn => "DRAWN",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "REGISTERED" => Some(Status::Registered),
            "DRAWN" => Some(Status::Drawn),
            _ => None,
        }
    }
}

/// Organizer-supplied parameters of a new lottery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenParams {
    pub name: String,
    pub announcement_date: DateTime<Utc>,
    pub num_winners: u32,
    pub block_offset: u64,
    #[serde(default)]
    pub note: String,
}

/// Context the hosting service supplies when an event is opened.
#[derive(Debug, Clone)]
pub struct OpenContext {
    /// Beacon tip height at registration time.
    pub latest_height: u64,
    pub now: DateTime<Utc>,
    pub channel_id: String,
    pub open_tx_id: TxId,
}

/// Full on-ledger record of one lottery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LotteryEvent {
    pub event_id: String,
    pub name: String,
    pub announcement_date: DateTime<Utc>,
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
    pub initial_random_key: Hash32,
    pub status: Status,
    /// SHA-256 of the organizer token; gates the draw.
    pub organizer_digest: Hash32,
}

impl LotteryEvent {
    /// Registers a new event. Returns the event and the organizer token, which
    /// is never stored in plaintext.
    pub fn open(
        params: OpenParams,
        ctx: OpenContext,
        entropy: &(impl EntropySource + ?Sized),
    ) -> Result<(LotteryEvent, AuthToken), LotteryError> {
        if params.num_winners < 1 {
            return Err(LotteryError::InvalidParameter("num_winners must be at least 1".into()));
        }
        if params.name.trim().is_empty() {
            return Err(LotteryError::InvalidParameter("name must not be empty".into()));
        }
        let target_height = ctx
            .latest_height
            .checked_add(params.block_offset)
            .ok_or_else(|| LotteryError::InvalidParameter("block_offset overflows height".into()))?;

        let announcement_date = params.announcement_date.trunc_subsecs(0);
        let now = ctx.now.trunc_subsecs(0);
        let salt: [u8; 8] = entropy::draw(entropy);
        let id_hash = sha256(&[
            params.name.as_bytes(),
            super::codec::format_timestamp(&announcement_date).as_bytes(),
            super::codec::format_timestamp(&now).as_bytes(),
            &salt,
        ]);
        let event_id = hex::encode(&id_hash.0[..16]);

        let initial_random_key = Hash32(entropy::draw(entropy));
        let organizer_token = AuthToken::generate(entropy);

        let event = LotteryEvent {
            event_id,
            name: params.name,
            announcement_date,
            num_winners: params.num_winners,
            block_offset: params.block_offset,
            target_height,
            note: params.note,
            channel_id: ctx.channel_id,
            open_tx_id: ctx.open_tx_id,
            subscribe_tx_ids: Vec::new(),
            draw_tx_id: None,
            member_list: Vec::new(),
            winner_list: Vec::new(),
            verifiable_random_key: None,
            random_seed: None,
            initial_random_key,
            status: Status::Registered,
            organizer_digest: organizer_token.digest(),
        };
        Ok((event, organizer_token))
    }

    /// Appends a participant. A fresh token is issued per call, so the same
    /// identity may subscribe more than once.
    pub fn subscribe(
        &mut self,
        identity: &str,
        now: DateTime<Utc>,
        tx_id: TxId,
        entropy: &(impl EntropySource + ?Sized),
    ) -> Result<AuthToken, LotteryError> {
        if self.status != Status::Registered {
            return Err(LotteryError::AlreadyDrawn);
        }
        if now >= self.announcement_date {
            return Err(LotteryError::PastDeadline);
        }
        if identity.is_empty() {
            return Err(LotteryError::InvalidParameter("identity must not be empty".into()));
        }
        let token = AuthToken::generate(entropy);
        let digest = ParticipantDigest::of(identity, &token);
        if self.member_list.contains(&digest) {
            return Err(LotteryError::DuplicateMember);
        }
        self.member_list.push(digest);
        self.subscribe_tx_ids.push(tx_id);
        Ok(token)
    }

    pub fn organizer_token_matches(&self, token: &AuthToken) -> bool {
        token.digest() == self.organizer_digest
    }

    /// Selects the winners from `seed` and seals the event with its
    /// verifiable random key. Block availability is the caller's concern.
    pub fn draw(
        &mut self,
        organizer_token: &AuthToken,
        seed: Hash32,
        now: DateTime<Utc>,
        tx_id: TxId,
    ) -> Result<(), LotteryError> {
        if !self.organizer_token_matches(organizer_token) {
            return Err(LotteryError::BadToken);
        }
        if self.status == Status::Drawn {
            return Err(LotteryError::AlreadyDrawn);
        }
        if now < self.announcement_date {
            return Err(LotteryError::TooEarly);
        }
        let winners = fisher_yates_draw(&self.member_list, self.num_winners as usize, &seed)?;

        self.winner_list = winners;
        self.random_seed = Some(seed);
        self.draw_tx_id = Some(tx_id);
        self.status = Status::Drawn;
        self.verifiable_random_key = Some(derive_verifiable_key(self)?);
        Ok(())
    }

    /// True iff SHA-256(identity ‖ token) is among the winners.
    pub fn check_winner(&self, identity: &str, token: &AuthToken) -> Result<bool, LotteryError> {
        if self.status != Status::Drawn {
            return Err(LotteryError::NotDrawn);
        }
        Ok(self.winner_list.contains(&ParticipantDigest::of(identity, token)))
    }

    /// Checks the structural invariants of the record.
    pub fn validate(&self) -> Result<(), String> {
        if self.num_winners < 1 {
            return Err("num_winners must be at least 1".into());
        }
        if self.subscribe_tx_ids.len() != self.member_list.len() {
            return Err("subscribe_tx_ids and member_list lengths differ".into());
        }
        let registered = self.status == Status::Registered;
        if registered != self.draw_tx_id.is_none() || registered != self.winner_list.is_empty() {
            return Err("status, draw_tx_id and winner_list disagree".into());
        }
        if !registered {
            if self.winner_list.len() != self.num_winners as usize {
                return Err("winner_list length differs from num_winners".into());
            }
            let mut seen = std::collections::HashSet::new();
            for w in &self.winner_list {
                if !self.member_list.contains(w) || !seen.insert(w) {
                    return Err("winner_list entries must be distinct members".into());
                }
            }
            if self.random_seed.is_none() {
                return Err("drawn event without random_seed".into());
            }
        }
        Ok(())
    }

    pub fn participant_count(&self) -> usize {
        self.member_list.len()
    }

}
