//! Pure lottery logic: event state machine, participant digests, seeded draw
//! and verifiable random key derivation.
//!
//! Nothing in here touches the ledger or the network. Randomness needed for
//! tokens and identifiers comes from an injected [`EntropySource`].

mod codec;
mod draw;
mod event;
mod key;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use codec::{canonical_serialize, parse_canonical, parse_export, to_export, CodecError, FIELD_ORDER};
pub use draw::{fisher_yates_draw, random_oracle, shuffle};
pub use event::{LotteryEvent, OpenContext, OpenParams, Status, DEFAULT_CHANNEL};
pub use key::derive_verifiable_key;
pub(crate) use key::hmac_sha256;

use crate::entropy::{self, EntropySource};
use crate::hash::{sha256, Hash32};

/// Placeholder rendered for fields that have not been populated yet.
pub const UNDEFINED: &str = "UNDEFINED";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LotteryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("event has already been drawn")]
    AlreadyDrawn,
    #[error("subscription deadline has passed")]
    PastDeadline,
    #[error("participant digest already registered")]
    DuplicateMember,
    #[error("event has not been drawn yet")]
    NotDrawn,
    #[error("{winners} winners requested but only {participants} participants")]
    TooManyWinners { winners: usize, participants: usize },
    #[error("event has no participants")]
    EmptyEvent,
    #[error("organizer token does not match")]
    BadToken,
    #[error("announcement date has not arrived")]
    TooEarly,
}

/// SHA-256(identity ‖ token): the only representation of a participant that
/// reaches the ledger.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParticipantDigest(pub Hash32);

impl ParticipantDigest {
    /// Identity is hashed as raw UTF-8 followed directly by the raw token bytes.
    pub fn of(identity: &str, token: &AuthToken) -> Self {
        ParticipantDigest(sha256(&[identity.as_bytes(), &token.0]))
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

impl fmt::Display for ParticipantDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for ParticipantDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParticipantDigest({})", self.0)
    }
}

impl FromStr for ParticipantDigest {
    type Err = crate::hash::HexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hash32::from_hex(s).map(ParticipantDigest)
    }
}

/// 16-byte secret handed to a participant or organizer exactly once.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct AuthToken(pub [u8; 16]);

impl AuthToken {
    pub const LEN: usize = 16;

    pub fn generate(entropy: &(impl EntropySource + ?Sized)) -> Self {
        AuthToken(entropy::draw(entropy))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, crate::hash::HexError> {
        let mut out = [0u8; 16];
        hex::decode_to_slice(s.trim(), &mut out).map_err(|_| crate::hash::HexError {
            expected: Self::LEN,
            input: s.to_string(),
        })?;
        Ok(AuthToken(out))
    }

    /// Digest stored on the ledger for organizer tokens.
    pub fn digest(&self) -> Hash32 {
        sha256(&[&self.0])
    }
}

impl fmt::Debug for AuthToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AuthToken(<redacted>)")
    }
}

/// Post-draw commitment: HMAC-SHA-256(initial key, seed) ‖ SHA-256(event).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerifiableRandomKey {
    pub hmac_part: Hash32,
    pub info_part: Hash32,
}

impl VerifiableRandomKey {
    pub fn key(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.hmac_part.0);
        out[32..].copy_from_slice(&self.info_part.0);
        out
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.key())
    }

    pub fn from_hex(s: &str) -> Result<Self, crate::hash::HexError> {
        let mut out = [0u8; 64];
        hex::decode_to_slice(s, &mut out).map_err(|_| crate::hash::HexError {
            expected: 64,
            input: s.to_string(),
        })?;
        let mut hmac_part = [0u8; 32];
        let mut info_part = [0u8; 32];
        hmac_part.copy_from_slice(&out[..32]);
        info_part.copy_from_slice(&out[32..]);
        Ok(VerifiableRandomKey {
            hmac_part: Hash32(hmac_part),
            info_part: Hash32(info_part),
        })
    }
}

impl fmt::Debug for VerifiableRandomKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VerifiableRandomKey({})", self.to_hex())
    }
}

impl Serialize for VerifiableRandomKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for VerifiableRandomKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        VerifiableRandomKey::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
