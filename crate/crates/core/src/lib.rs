//! Verifiable lottery engine.
//!
//! Winners are drawn by a deterministic shuffle seeded with a Bitcoin block
//! hash, event state lives on a simulated append-only replicated ledger, and
//! every step of a draw can be re-derived and checked by any participant.
//!
//! The crate is split by concern:
//!
//! * [`lottery`] holds the pure event logic: the state machine, participant
//!   digests, the seeded draw and the verifiable random key.
//! * [`beacon`] fetches block headers (live explorer API or a CSV fixture)
//!   and recomputes block hashes.
//! * [`ledger`] simulates N peer replicas behind a single sequencer.
//! * [`verification`] re-checks a drawn event and runs fairness audits.

pub mod beacon;
pub mod entropy;
pub mod hash;
pub mod ledger;
pub mod lottery;
pub mod verification;


pub use entropy::{EntropySource, OsEntropy, SeededEntropy};
pub use beacon::{BlockHeader, BlockSource};
pub use ledger::Ledger;
pub use hash::{sha256, Hash32, TxId};

pub use lottery::{AuthToken, LotteryEvent, ParticipantDigest, Status, VerifiableRandomKey};
