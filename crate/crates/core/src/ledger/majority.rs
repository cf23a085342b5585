use std::collections::HashMap;
use std::hash::Hash;

/// One peer's answer to a read.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PeerResponse {
    Value(Vec<u8>),
    /// The peer answered but holds no value for the key.
    Missing,
    /// Crashed or unreachable; not a vote.
    Unavailable,
}

/// Returns the response shared by strictly more than half of `total` peers.
///
/// `None` entries are non-votes but still count toward `total`.
pub fn strict_majority<T: Eq + Hash + Clone>(responses: &[Option<T>], total: usize) -> Option<T> {
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for r in responses.iter().flatten() {
        *counts.entry(r).or_default() += 1;
    }
    counts
        .into_iter()
        .find(|(_, c)| 2 * c > total)
        .map(|(v, _)| v.clone())
}
