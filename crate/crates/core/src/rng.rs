//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Child seeds for
//! sweeps and per-configuration Monte Carlo streams are derived by mixing the
//! parent seed with a list of counters through the SplitMix64 finalizer, so a
//! given (seed, counters) pair always names the same stream regardless of
//! scheduling or platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and an ordered list of counters.
pub fn derive_seed(base: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(splitmix64(base), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// Hash a list of reals by their bit patterns; used to key streams on configurations.
pub fn hash_reals(values: &[f64]) -> u64 {
    let bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
    derive_seed(values.len() as u64, &bits)
}
