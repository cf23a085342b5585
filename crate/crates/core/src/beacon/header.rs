use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::hash::Hash32;

/// The six hashed header fields plus the block height.
///
/// `previous_hash` and `merkle_root` are in display order (as explorers print
/// them); they are reversed only when building the 80-byte wire header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockHeader {
    pub version: i32,
    pub previous_hash: Hash32,
    pub merkle_root: Hash32,
    pub timestamp: u32,
    pub bits: u32,
    pub nonce: u32,
    pub height: u64,
}

impl BlockHeader {
    /// 80-byte Bitcoin wire encoding.
    pub fn wire_bytes(&self) -> [u8; 80] {
        let mut out = [0u8; 80];
        out[0..4].copy_from_slice(&self.version.to_le_bytes());
        out[4..36].copy_from_slice(&reversed(&self.previous_hash));
        out[36..68].copy_from_slice(&reversed(&self.merkle_root));
        out[68..72].copy_from_slice(&self.timestamp.to_le_bytes());
        out[72..76].copy_from_slice(&self.bits.to_le_bytes());
        out[76..80].copy_from_slice(&self.nonce.to_le_bytes());
        out
    }
}

fn reversed(h: &Hash32) -> [u8; 32] {
    let mut b = h.0;
    b.reverse();
    b
}

/// Double SHA-256 of the wire header, returned in display order.
pub fn compute_block_hash(header: &BlockHeader) -> Hash32 {
    let first = Sha256::digest(header.wire_bytes());
    let second: [u8; 32] = Sha256::digest(first).into();
    reversed(&Hash32(second)).into()
}

pub fn verify_seed(header: &BlockHeader, claimed_seed: &Hash32) -> bool {
    compute_block_hash(header) == *claimed_seed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn genesis() -> BlockHeader {
        BlockHeader {
            version: 1,
            previous_hash: Hash32::ZERO,
            merkle_root: Hash32::from_hex(
                "4a5e1e4baab89f3a32518a88c31bc87f618f76673e2cc77ab2127b7afdeda33b",
            )
            .unwrap(),
            timestamp: 1_231_006_505,
            bits: 0x1d00ffff,
            nonce: 2_083_236_893,
            height: 0,
        }
    }

    const GENESIS_HASH: &str = "000000000019d6689c085ae165831e934ff763ae46a2a6c172b3f1b60a8ce26f";

    #[test]
    fn genesis_wire_bytes() {
        let wire = genesis().wire_bytes();
        assert_eq!(hex::encode(&wire[..4]), "01000000");
        assert_eq!(hex::encode(&wire[36..40]), "3ba3edfd");
        assert_eq!(hex::encode(&wire[68..80]), "29ab5f49ffff001d1dac2b7c");
    }

    #[test]
    fn genesis_hash() {
        let h = compute_block_hash(&genesis());
        assert_eq!(h.to_hex(), GENESIS_HASH);
        assert_eq!(compute_block_hash(&genesis()), h);
    }

    #[test]
    fn flipped_nonce_bit_changes_hash() {
        let mut g = genesis();
        g.nonce ^= 1;
        assert_ne!(compute_block_hash(&g).to_hex(), GENESIS_HASH);
    }

    #[test]
    fn seed_verification() {
        let seed = Hash32::from_hex(GENESIS_HASH).unwrap();
        assert!(verify_seed(&genesis(), &seed));
        assert!(!verify_seed(&genesis(), &Hash32::ZERO));
        let mut mutated = genesis();
        mutated.timestamp += 1;
        assert!(!verify_seed(&mutated, &seed));
    }

    #[test]
    fn height_is_not_hashed() {
        let mut g = genesis();
        g.height = 42;
        assert_eq!(compute_block_hash(&g).to_hex(), GENESIS_HASH);
    }
}
