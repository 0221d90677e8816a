//! Named seed streams.
//!
//! Every random decision in the crate draws from a ChaCha8 generator whose
//! seed is derived from a parent seed, a stream name and an index. The
//! derivation is a SHA-256 digest, so it is stable across platforms and
//! releases and independent of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed for `(stream, index)` under `parent`.
pub fn derive_seed(parent: u64, stream: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(parent.to_le_bytes());
    hasher.update((stream.len() as u64).to_le_bytes());
    hasher.update(stream.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from_seed(derive_seed(parent, stream, index))`.
pub fn stream_rng(parent: u64, stream: &str, index: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(parent, stream, index))
}
