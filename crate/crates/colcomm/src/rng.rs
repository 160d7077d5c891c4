//! Seeded, platform-independent randomness.
//!
//! Everything randomized in this crate takes an explicit `u64` seed and runs
//! on ChaCha20, so instances and protocol runs reproduce bit-for-bit across
//! machines. Child seeds are derived with the SplitMix64 finalizer, which
//! makes per-trial results independent of how trials are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SeededRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Derive the `index`-th child seed of `master` (SplitMix64 finalizer).
pub fn derive(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
