//! Stable seeded hashing.
//!
//! Everything that must be reproducible across processes and platforms
//! (random embeddings, control labels, negative sampling) derives its
//! randomness from SHA-256 over a seed and a byte key, never from
//! `std::hash`, whose output is not guaranteed to be stable.

use sha2::{Digest, Sha256};

/// Hashes `parts` under `seed` into a 64-bit value. Parts are length-prefixed
/// so that `["ab", "c"]` and `["a", "bc"]` hash differently.
pub(crate) fn seeded_hash(seed: u64, domain: &str, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(domain.as_bytes());
    hasher.update(seed.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Maps a hash to the unit interval `[0, 1)` using its top 53 bits.
pub(crate) fn unit_interval(hash: u64) -> f64 {
    (hash >> 11) as f64 / (1u64 << 53) as f64
}
