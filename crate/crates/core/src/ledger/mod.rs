//! Simulated append-only replicated key/value ledger.
//!
//! N peer replicas sit behind one sequencer, which plays the ordering
//! service: every write gets the next sequence number and a fresh transaction
//! id, then is appended to the log of each live peer. Reads go to a single
//! peer, to a chosen peer, or to all of them through [`Ledger::majority_read`].
//!
//! Faults are injected per peer. A crashed peer neither acknowledges writes
//! nor answers reads; a corrupted peer rewrites values on the way out, as a
//! hacked node serving altered data would.

mod majority;
pub mod store;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

pub use majority::{strict_majority, PeerResponse};

use crate::entropy::{self, EntropySource, OsEntropy};
use crate::hash::{sha256, Hash32, TxId};

pub const DEFAULT_PEER_COUNT: usize = 3;
pub const ENV_DATA_DIR: &str = "BLOCKLOT_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    #[error("invalid key {0:?}")]
    InvalidKey(String),
    #[error("key {0:?} not found")]
    KeyNotFound(String),
    #[error("replication failed: {live} of {total} peers live, majority required")]
    ReplicationFailure { live: usize, total: usize },
    #[error("no value reported by a strict majority of peers for {0:?}")]
    NoMajority(String),
    #[error("peer {0} is unavailable")]
    PeerUnavailable(String),
    #[error("no peer with index {0}")]
    UnknownPeer(usize),
    #[error("ledger I/O error: {0}")]
    Io(String),
    #[error("corrupt ledger log: {0}")]
    CorruptLog(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub key: String,
    pub value: Vec<u8>,
    pub tx_id: TxId,
    pub sequence: u64,
}

/// Value substitution applied by a corrupted peer: `(key, honest) -> served`.
pub type Corruption = Arc<dyn Fn(&str, &[u8]) -> Vec<u8> + Send + Sync>;

#[derive(Clone)]
pub enum Fault {
    Crashed,
    Corrupted(Corruption),
}

impl std::fmt::Debug for Fault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fault::Crashed => f.write_str("Crashed"),
            Fault::Corrupted(_) => f.write_str("Corrupted(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LedgerConfig {
    /// Must be at least 1.
    pub peer_count: usize,
    /// Directory for per-peer log files; in-memory only when `None`.
    pub data_dir: Option<PathBuf>,
    /// Peer that answers [`Ledger::get_state`].
    pub local_peer: usize,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            peer_count: DEFAULT_PEER_COUNT,
            data_dir: None,
            local_peer: 0,
        }
    }
}

struct Peer {
    peer_id: String,
    entries: Vec<LedgerEntry>,
    latest: BTreeMap<String, usize>,
    fault: Option<Fault>,
    file: Option<File>,
}

impl Peer {
    fn apply(&mut self, entry: LedgerEntry) -> Result<(), LedgerError> {
        if let Some(file) = self.file.as_mut() {
            store::append(file, &entry)?;
        }
        self.latest.insert(entry.key.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    fn crashed(&self) -> bool {
        matches!(self.fault, Some(Fault::Crashed))
    }

    fn serve(&self, key: &str, value: &[u8]) -> Vec<u8> {
        match &self.fault {
            Some(Fault::Corrupted(f)) => f(key, value),
            _ => value.to_vec(),
        }
    }

    fn read(&self, key: &str) -> PeerResponse {
        if self.crashed() {
            return PeerResponse::Unavailable;
        }
        match self.latest.get(key) {
            Some(&i) => PeerResponse::Value(self.serve(key, &self.entries[i].value)),
            None => PeerResponse::Missing,
        }
    }
}

/// Committed world state and the ordered log held by the sequencer.
#[derive(Default)]
struct Sequencer {
    next_sequence: u64,
    log: Vec<LedgerEntry>,
    state: BTreeMap<String, Vec<u8>>,
}

/// Read-only view of committed state handed to [`Ledger::invoke`] closures.
pub struct WorldState<'a> {
    state: &'a BTreeMap<String, Vec<u8>>,
}

impl WorldState<'_> {
    pub fn get(&self, key: &str) -> Option<&[u8]> {
        self.state.get(key).map(Vec::as_slice)
    }
}

/// A write produced by an [`Ledger::invoke`] closure.
pub struct Write {
    pub key: String,
    pub value: Vec<u8>,
}

pub struct Ledger {
    peers: Vec<RwLock<Peer>>,
    sequencer: Mutex<Sequencer>,
    local_peer: usize,
    entropy: Arc<dyn EntropySource>,
}

fn validate_key(key: &str) -> Result<(), LedgerError> {
    if key.is_empty() || key.contains(['\t', '\n', '\r']) {
        return Err(LedgerError::InvalidKey(key.to_string()));
    }
    Ok(())
}

impl Ledger {
    pub fn new(config: LedgerConfig) -> Result<Self, LedgerError> {
        Self::with_entropy(config, Arc::new(OsEntropy))
    }

    /// Opens the ledger, replaying any peer logs found in `data_dir`. Peers
    /// that missed writes are caught up from the union of all logs.
    pub fn with_entropy(
        config: LedgerConfig,
        entropy: Arc<dyn EntropySource>,
    ) -> Result<Self, LedgerError> {
        if config.peer_count == 0 {
            return Err(LedgerError::UnknownPeer(0));
        }
        if config.local_peer >= config.peer_count {
            return Err(LedgerError::UnknownPeer(config.local_peer));
        }
        if let Some(dir) = &config.data_dir {
            std::fs::create_dir_all(dir)
                .map_err(|e| LedgerError::Io(format!("{}: {e}", dir.display())))?;
        }

        let mut peers = Vec::with_capacity(config.peer_count);
        let mut union: BTreeMap<u64, LedgerEntry> = BTreeMap::new();
        for i in 0..config.peer_count {
            let peer_id = format!("peer{i}");
            let mut entries = Vec::new();
            let mut file = None;
            if let Some(dir) = &config.data_dir {
                let path = store::peer_log_path(dir, &peer_id);
                entries = store::read_log(&path)?;
                file = Some(store::open_append(&path)?);
            }
            for e in &entries {
                match union.get(&e.sequence) {
                    Some(existing) if existing != e => {
                        return Err(LedgerError::CorruptLog(format!(
                            "replicas disagree on sequence {}",
                            e.sequence
                        )))
                    }
                    _ => {
                        union.insert(e.sequence, e.clone());
                    }
                }
            }
            let latest = entries
                .iter()
                .enumerate()
                .map(|(idx, e)| (e.key.clone(), idx))
                .collect();
            peers.push(Peer {
                peer_id,
                entries,
                latest,
                fault: None,
                file,
            });
        }

        let mut sequencer = Sequencer::default();
        for entry in union.into_values() {
            sequencer.next_sequence = entry.sequence + 1;
            sequencer.state.insert(entry.key.clone(), entry.value.clone());
            sequencer.log.push(entry);
        }
        for peer in &mut peers {
            catch_up(peer, &sequencer.log)?;
        }

        Ok(Ledger {
            peers: peers.into_iter().map(RwLock::new).collect(),
            sequencer: Mutex::new(sequencer),
            local_peer: config.local_peer,
            entropy,
        })
    }

    pub fn peer_count(&self) -> usize {
        self.peers.len()
    }

    pub fn peer_id(&self, peer: usize) -> Result<String, LedgerError> {
        Ok(self.peer(peer)?.read().expect("peer lock poisoned").peer_id.clone())
    }

    fn peer(&self, peer: usize) -> Result<&RwLock<Peer>, LedgerError> {
        self.peers.get(peer).ok_or(LedgerError::UnknownPeer(peer))
    }

    /// Writes `value` under `key`. The transaction id is
    /// SHA-256(sequence ‖ key ‖ value ‖ 8 random bytes).
    pub fn put_state(&self, key: &str, value: &[u8]) -> Result<TxId, LedgerError> {
        validate_key(key)?;
        let (tx, ()) = self.execute(&[key.as_bytes(), value], |_, _| {
            Ok::<_, LedgerError>((
                Some(Write {
                    key: key.to_string(),
                    value: value.to_vec(),
                }),
                (),
            ))
        })?;
        Ok(tx)
    }

    /// Runs a transaction against committed state under the sequencer lock.
    ///
    /// The closure sees the transaction id before producing its write, the way
    /// chaincode can record its own id. The id is
    /// SHA-256(sequence ‖ proposal ‖ 8 random bytes). Returning no write
    /// commits nothing and consumes no sequence number.
    pub fn invoke<T, E, F>(&self, proposal: &[u8], f: F) -> Result<(TxId, T), E>
    where
        F: FnOnce(&WorldState<'_>, &TxId) -> Result<(Option<Write>, T), E>,
        E: From<LedgerError>,
    {
        self.execute(&[proposal], f)
    }

    fn execute<T, E, F>(&self, proposal: &[&[u8]], f: F) -> Result<(TxId, T), E>
    where
        F: FnOnce(&WorldState<'_>, &TxId) -> Result<(Option<Write>, T), E>,
        E: From<LedgerError>,
    {
        let mut seq = self.sequencer.lock().expect("sequencer lock poisoned");
        let sequence = seq.next_sequence;
        let salt: [u8; 8] = entropy::draw(&*self.entropy);
        let seq_bytes = sequence.to_be_bytes();
        let mut parts: Vec<&[u8]> = vec![&seq_bytes];
        parts.extend_from_slice(proposal);
        parts.push(&salt);
        let tx_id = TxId::new(sha256(&parts).to_hex());

        let (write, out) = f(&WorldState { state: &seq.state }, &tx_id)?;
        let Some(write) = write else {
            return Ok((tx_id, out));
        };
        validate_key(&write.key)?;

        let total = self.peers.len();
        let mut live: Vec<_> = Vec::with_capacity(total);
        for p in &self.peers {
            let guard = p.write().expect("peer lock poisoned");
            if !guard.crashed() {
                live.push(guard);
            }
        }
        if 2 * live.len() <= total {
            return Err(LedgerError::ReplicationFailure {
                live: live.len(),
                total,
            }
            .into());
        }

        let entry = LedgerEntry {
            key: write.key,
            value: write.value,
            tx_id: tx_id.clone(),
            sequence,
        };
        seq.next_sequence += 1;
        seq.state.insert(entry.key.clone(), entry.value.clone());
        seq.log.push(entry.clone());
        for peer in live.iter_mut() {
            peer.apply(entry.clone())?;
        }
        Ok((tx_id, out))
    }

    /// Latest value for `key` as served by the local peer.
    pub fn get_state(&self, key: &str) -> Result<Vec<u8>, LedgerError> {
        self.get_state_at(self.local_peer, key)
    }

    pub fn get_state_at(&self, peer: usize, key: &str) -> Result<Vec<u8>, LedgerError> {
        let guard = self.peer(peer)?.read().expect("peer lock poisoned");
        match guard.read(key) {
            PeerResponse::Value(v) => Ok(v),
            PeerResponse::Missing => Err(LedgerError::KeyNotFound(key.to_string())),
            PeerResponse::Unavailable => Err(LedgerError::PeerUnavailable(guard.peer_id.clone())),
        }
    }

    /// All latest pairs with `start <= key < end` from the local peer, in key
    /// order. Empty bounds are unbounded.
    pub fn get_state_by_range(
        &self,
        start: &str,
        end: &str,
    ) -> Result<Vec<(String, Vec<u8>)>, LedgerError> {
        let guard = self.peer(self.local_peer)?.read().expect("peer lock poisoned");
        if guard.crashed() {
            return Err(LedgerError::PeerUnavailable(guard.peer_id.clone()));
        }
        Ok(guard
            .latest
            .iter()
            .filter(|(k, _)| k.as_str() >= start && (end.is_empty() || k.as_str() < end))
            .map(|(k, &i)| (k.clone(), guard.serve(k, &guard.entries[i].value)))
            .collect())
    }

    /// Each peer's answer for `key`, in peer order.
    pub fn responses(&self, key: &str) -> Vec<PeerResponse> {
        self.peers
            .iter()
            .map(|p| p.read().expect("peer lock poisoned").read(key))
            .collect()
    }

    /// Value reported by more than half of all configured peers.
    pub fn majority_read(&self, key: &str) -> Result<Vec<u8>, LedgerError> {
        let votes: Vec<Option<PeerResponse>> = self
            .responses(key)
            .into_iter()
            .map(|r| (r != PeerResponse::Unavailable).then_some(r))
            .collect();
        match strict_majority(&votes, self.peers.len()) {
            Some(PeerResponse::Value(v)) => Ok(v),
            Some(_) => Err(LedgerError::KeyNotFound(key.to_string())),
            None => Err(LedgerError::NoMajority(key.to_string())),
        }
    }

    pub fn crash(&self, peer: usize) -> Result<(), LedgerError> {
        self.set_fault(peer, Some(Fault::Crashed))
    }

    pub fn corrupt(&self, peer: usize, corruption: Corruption) -> Result<(), LedgerError> {
        self.set_fault(peer, Some(Fault::Corrupted(corruption)))
    }

    /// Clears any fault and replays writes the peer missed while down.
    pub fn recover(&self, peer: usize) -> Result<(), LedgerError> {
        let seq = self.sequencer.lock().expect("sequencer lock poisoned");
        let mut guard = self.peer(peer)?.write().expect("peer lock poisoned");
        guard.fault = None;
        catch_up(&mut guard, &seq.log)
    }

    fn set_fault(&self, peer: usize, fault: Option<Fault>) -> Result<(), LedgerError> {
        self.peer(peer)?.write().expect("peer lock poisoned").fault = fault;
        Ok(())
    }

    /// Snapshot of a peer's full log.
    pub fn peer_entries(&self, peer: usize) -> Result<Vec<LedgerEntry>, LedgerError> {
        Ok(self.peer(peer)?.read().expect("peer lock poisoned").entries.clone())
    }

    /// Honest latest-value map of a peer, ignoring faults.
    pub fn peer_state(&self, peer: usize) -> Result<BTreeMap<String, Vec<u8>>, LedgerError> {
        Ok(store::latest_values(&self.peer_entries(peer)?))
    }

    /// SHA-256 over the encoded first `len` entries of a peer's log.
    pub fn log_digest(&self, peer: usize, len: usize) -> Result<Hash32, LedgerError> {
        let entries = self.peer_entries(peer)?;
        let lines: Vec<String> = entries.iter().take(len).map(store::encode_entry).collect();
        let parts: Vec<&[u8]> = lines.iter().map(|l| l.as_bytes()).collect();
        Ok(sha256(&parts))
    }
}

fn catch_up(peer: &mut Peer, log: &[LedgerEntry]) -> Result<(), LedgerError> {
    let have = peer.entries.last().map(|e| e.sequence + 1).unwrap_or(0);
    for entry in log.iter().filter(|e| e.sequence >= have) {
        peer.apply(entry.clone())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::SeededEntropy;

    fn ledger(n: usize) -> Ledger {
        Ledger::with_entropy(
            LedgerConfig {
                peer_count: n,
                ..Default::default()
            },
            Arc::new(SeededEntropy::new(1)),
        )
        .unwrap()
    }

    fn flip() -> Corruption {
        Arc::new(|_, v| {
            let mut out = v.to_vec();
            out.push(b'!');
            out
        })
    }

    #[test]
    fn read_your_write() {
        let l = ledger(3);
        l.put_state("a", b"1").unwrap();
        assert_eq!(l.get_state("a").unwrap(), b"1");
    }

    #[test]
    fn latest_wins_history_kept() {
        let l = ledger(3);
        let t1 = l.put_state("a", b"1").unwrap();
        let t2 = l.put_state("a", b"2").unwrap();
        assert_ne!(t1, t2);
        assert_eq!(l.get_state("a").unwrap(), b"2");
        let log = l.peer_entries(0).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log[0].value, b"1");
        assert_eq!(log[1].sequence, log[0].sequence + 1);
    }

    #[test]
    fn unknown_key_and_bad_keys() {
        let l = ledger(1);
        assert_eq!(l.get_state("nope"), Err(LedgerError::KeyNotFound("nope".into())));
        assert!(matches!(l.put_state("", b"x"), Err(LedgerError::InvalidKey(_))));
        assert!(matches!(l.put_state("a\tb", b"x"), Err(LedgerError::InvalidKey(_))));
    }

    #[test]
    fn all_crashed_fails_replication() {
        let l = ledger(3);
        for i in 0..3 {
            l.crash(i).unwrap();
        }
        assert_eq!(
            l.put_state("a", b"1"),
            Err(LedgerError::ReplicationFailure { live: 0, total: 3 })
        );
    }

    #[test]
    fn minority_crash_still_replicates_and_recovery_catches_up() {
        let l = ledger(3);
        l.crash(2).unwrap();
        l.put_state("a", b"1").unwrap();
        assert_eq!(l.peer_entries(2).unwrap().len(), 0);
        l.crash(1).unwrap();
        assert!(matches!(
            l.put_state("b", b"2"),
            Err(LedgerError::ReplicationFailure { live: 1, total: 3 })
        ));
        l.recover(1).unwrap();
        l.recover(2).unwrap();
        assert_eq!(l.peer_state(2).unwrap(), l.peer_state(0).unwrap());
        assert_eq!(l.get_state_at(2, "a").unwrap(), b"1");
    }

    #[test]
    fn range_is_half_open_and_sorted() {
        let l = ledger(3);
        assert!(l.get_state_by_range("", "").unwrap().is_empty());
        for k in ["c", "a", "b"] {
            l.put_state(k, k.as_bytes()).unwrap();
        }
        let keys = |r: Vec<(String, Vec<u8>)>| r.into_iter().map(|(k, _)| k).collect::<Vec<_>>();
        assert_eq!(keys(l.get_state_by_range("a", "c").unwrap()), ["a", "b"]);
        assert_eq!(keys(l.get_state_by_range("", "").unwrap()), ["a", "b", "c"]);
        assert_eq!(keys(l.get_state_by_range("b", "").unwrap()), ["b", "c"]);
    }

    #[test]
    fn majority_with_one_corrupted_peer() {
        let l = ledger(3);
        l.put_state("k", b"v").unwrap();
        l.corrupt(1, flip()).unwrap();
        assert_eq!(l.get_state_at(1, "k").unwrap(), b"v!");
        assert_eq!(l.majority_read("k").unwrap(), b"v");
    }

    #[test]
    fn four_peers_split_two_two_has_no_majority() {
        let l = ledger(4);
        l.put_state("k", b"v").unwrap();
        l.corrupt(2, flip()).unwrap();
        l.corrupt(3, flip()).unwrap();
        assert_eq!(l.majority_read("k"), Err(LedgerError::NoMajority("k".into())));
    }

    #[test]
    fn crashed_peers_are_non_votes() {
        let l = ledger(3);
        l.put_state("k", b"v").unwrap();
        l.crash(0).unwrap();
        assert_eq!(l.majority_read("k").unwrap(), b"v");
        l.corrupt(1, flip()).unwrap();
        assert_eq!(l.majority_read("k"), Err(LedgerError::NoMajority("k".into())));
        assert!(matches!(l.get_state("k"), Err(LedgerError::PeerUnavailable(_))));
    }

    #[test]
    fn majority_absent_is_key_not_found() {
        let l = ledger(3);
        assert_eq!(l.majority_read("zz"), Err(LedgerError::KeyNotFound("zz".into())));
    }

    #[test]
    fn invoke_sees_its_own_tx_id_and_committed_state() {
        let l = ledger(3);
        l.put_state("counter", b"1").unwrap();
        let (tx, seen) = l
            .invoke(b"incr", |state, tx| {
                let cur = state.get("counter").unwrap().to_vec();
                let mut next = cur.clone();
                next.extend_from_slice(tx.as_str().as_bytes());
                Ok::<_, LedgerError>((
                    Some(Write {
                        key: "counter".into(),
                        value: next,
                    }),
                    cur,
                ))
            })
            .unwrap();
        assert_eq!(seen, b"1");
        let stored = l.get_state("counter").unwrap();
        assert!(stored.ends_with(tx.as_str().as_bytes()));
        assert_eq!(l.peer_entries(0).unwrap().last().unwrap().tx_id, tx);
    }

    #[test]
    fn invoke_without_write_commits_nothing() {
        let l = ledger(3);
        let (_, ()) = l
            .invoke(b"noop", |_, _| Ok::<_, LedgerError>((None, ())))
            .unwrap();
        assert!(l.peer_entries(0).unwrap().is_empty());
        l.put_state("a", b"1").unwrap();
        assert_eq!(l.peer_entries(0).unwrap()[0].sequence, 0);
    }

    #[test]
    fn persisted_logs_replay_on_restart() {
        let dir = tempfile::tempdir().unwrap();
        let config = LedgerConfig {
            data_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        {
            let l = Ledger::new(config.clone()).unwrap();
            l.put_state("a", b"1").unwrap();
            l.crash(2).unwrap();
            l.put_state("b", b"2").unwrap();
        }
        let l = Ledger::new(config).unwrap();
        for p in 0..3 {
            assert_eq!(l.peer_state(p).unwrap().len(), 2, "peer {p}");
        }
        let tx = l.put_state("c", b"3").unwrap();
        let last = l.peer_entries(2).unwrap().pop().unwrap();
        assert_eq!((last.sequence, last.tx_id), (2, tx));
        let on_disk = store::read_log(&store::peer_log_path(dir.path(), "peer2")).unwrap();
        assert_eq!(on_disk.len(), 3);
    }

    #[test]
    fn disagreeing_logs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config = LedgerConfig {
            data_dir: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        Ledger::new(config.clone()).unwrap().put_state("a", b"1").unwrap();
        let path = store::peer_log_path(dir.path(), "peer1");
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace(&hex::encode(b"1"), &hex::encode(b"9"))).unwrap();
        assert!(matches!(Ledger::new(config), Err(LedgerError::CorruptLog(_))));
    }
}
