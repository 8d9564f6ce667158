//! Hierarchical seeding: one root seed, independent streams per trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Generator for trial `trial` under `seed`; independent of evaluation order.
pub fn trial_rng(seed: u64, trial: u64) -> Rng {
    let mut r = Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// Derive a child seed for a named sub-experiment.
pub fn child_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the parent seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
