use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use super::{canonical_serialize, LotteryError, LotteryEvent, VerifiableRandomKey};
use crate::hash::{sha256, Hash32};

/// HMAC-SHA-256(initial_random_key, random_seed) ‖ SHA-256(canonical event).
///
/// The stored key itself is never part of the hashed serialization, so the
/// result can be recomputed from a sealed event and compared.
pub fn derive_verifiable_key(event: &LotteryEvent) -> Result<VerifiableRandomKey, LotteryError> {
    let seed = event.random_seed.ok_or(LotteryError::NotDrawn)?;
    Ok(VerifiableRandomKey {
        hmac_part: hmac_sha256(&event.initial_random_key, &seed),
        info_part: sha256(&[&canonical_serialize(event)]),
    })
}

pub(crate) fn hmac_sha256(key: &Hash32, message: &Hash32) -> Hash32 {
    let mut mac = <Hmac<Sha256> as KeyInit>::new_from_slice(key.as_bytes())
        .expect("HMAC accepts keys of any length");
    mac.update(message.as_bytes());
    Hash32(mac.finalize().into_bytes().into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hmac_of_zero_key_and_zero_message_matches_reference() {
        // Python: hmac.new(bytes(32), bytes(32), hashlib.sha256)
        assert_eq!(
            hmac_sha256(&Hash32::ZERO, &Hash32::ZERO).to_hex(),
            "33ad0a1c607ec03b09e6cd9893680ce210adf300aa1f2660e1b22e10f170f92a"
        );
    }
}
