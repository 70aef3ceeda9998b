//! Counter-based per-trajectory random streams.
//!
//! Every trajectory in an ensemble gets its own ChaCha stream derived from
//! `(master_seed, trajectory_index)`. Streams are statistically independent,
//! cheap to create, and — crucially — make results independent of scheduling:
//! trajectory `i` consumes the same randomness whether it runs first, last,
//! or on another thread.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used throughout the crate.
pub type PathRng = ChaCha8Rng;

/// Stream for trajectory `index` under `master_seed`.
///
/// The master seed selects the key, the trajectory index selects the ChaCha
/// stream counter, so distinct indices never overlap.
pub fn trajectory_rng(master_seed: u64, index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Stream for auxiliary (non-trajectory) sampling: condition probes,
/// calibration sample sets, and the like. Offset keeps these streams disjoint
/// from trajectory streams under the same master seed.
pub fn probe_rng(master_seed: u64, purpose: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(u64::MAX - purpose);
    rng
}
