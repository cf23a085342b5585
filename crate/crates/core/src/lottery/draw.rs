use super::{LotteryError, ParticipantDigest};
use crate::hash::{sha256, Hash32};

/// Derives one 32-bit value from `source` and the source for the next call.
///
/// The value is the wrapping sum of the first four little-endian `u32` words of
/// SHA-256(source); the digest itself becomes the next source.
pub fn random_oracle(source: &Hash32) -> (u32, Hash32) {
    let digest = sha256(&[source.as_bytes()]);
    let value = digest.0[..16]
        .chunks_exact(4)
        .map(|w| u32::from_le_bytes([w[0], w[1], w[2], w[3]]))
        .fold(0u32, u32::wrapping_add);
    (value, digest)
}

/// Seeded Fisher-Yates shuffle driven by [`random_oracle`] chaining.
///
/// For `i` in `0..len`, swaps `items[i]` with `items[i + v mod (len - i)]`
/// where `v` is the next oracle value. Exactly `len` oracle calls are made.
/// The reduction is a plain modulo; its bias is below `len / 2^32`.
pub fn shuffle<T: Clone>(items: &[T], seed: &Hash32) -> Vec<T> {
    let mut out = items.to_vec();
    let len = out.len();
    let mut source = *seed;
    for i in 0..len {
        let (value, next) = random_oracle(&source);
        let j = i + (value as usize) % (len - i);
        out.swap(i, j);
        source = next;
    }
    out
}

/// Draws `num_winners` digests out of `members`. The first `num_winners`
/// entries of the shuffled list are the winners, in order.
pub fn fisher_yates_draw(
    members: &[ParticipantDigest],
    num_winners: usize,
    seed: &Hash32,
) -> Result<Vec<ParticipantDigest>, LotteryError> {
    if members.is_empty() {
        return Err(LotteryError::EmptyEvent);
    }
    if num_winners == 0 {
        return Err(LotteryError::InvalidParameter("num_winners must be at least 1".into()));
    }
    if num_winners > members.len() {
        return Err(LotteryError::TooManyWinners {
            winners: num_winners,
            participants: members.len(),
        });
    }
    let mut shuffled = shuffle(members, seed);
    shuffled.truncate(num_winners);
    Ok(shuffled)
}
