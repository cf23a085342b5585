//! Entropy sources for tokens, keys and identifiers.
//!
//! Production code uses [`OsEntropy`]. Tests inject [`SeededEntropy`] or
//! [`FixedEntropy`] so tokens are reproducible.

use std::sync::Mutex;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub trait EntropySource: Send + Sync {
    fn fill(&self, buf: &mut [u8]);
}

/// Operating-system backed CSPRNG.
#[derive(Debug, Default, Clone, Copy)]
pub struct OsEntropy;

impl EntropySource for OsEntropy {
    fn fill(&self, buf: &mut [u8]) {
        rand::rng().fill_bytes(buf);
    }
}

/// Deterministic ChaCha20 stream for reproducible runs.
#[derive(Debug)]
pub struct SeededEntropy(Mutex<ChaCha20Rng>);

impl SeededEntropy {
    pub fn new(seed: u64) -> Self {
        SeededEntropy(Mutex::new(ChaCha20Rng::seed_from_u64(seed)))
    }
}

impl EntropySource for SeededEntropy {
    fn fill(&self, buf: &mut [u8]) {
        self.0.lock().expect("entropy lock poisoned").fill_bytes(buf);
    }
}

/// Repeats one byte forever. Only useful in tests.
#[derive(Debug, Clone, Copy)]
pub struct FixedEntropy(pub u8);

impl EntropySource for FixedEntropy {
    fn fill(&self, buf: &mut [u8]) {
        buf.fill(self.0);
    }
}

impl<T: EntropySource + ?Sized> EntropySource for &T {
    fn fill(&self, buf: &mut [u8]) {
        (**self).fill(buf)
    }
}

impl<T: EntropySource + ?Sized> EntropySource for std::sync::Arc<T> {
    fn fill(&self, buf: &mut [u8]) {
        (**self).fill(buf)
    }
}

/// Draws `N` bytes from a possibly unsized source.
pub fn draw<const N: usize>(source: &(impl EntropySource + ?Sized)) -> [u8; N] {
    let mut out = [0u8; N];
    source.fill(&mut out);
    out
}
