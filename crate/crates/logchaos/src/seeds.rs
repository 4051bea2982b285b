//! Deterministic random-stream derivation.
//!
//! One master seed per run. Every (rung, replica) pair owns a private ChaCha
//! stream derived by counter, never by sequential draws, so the estimate for
//! replica `r` is independent of how many replicas run, in what order, or on
//! how many threads. Reductions then run in fixed replica order, which makes
//! whole runs bit-reproducible from `(config, master_seed)` alone.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Replicas per rung are capped so the (rung, replica) pair packs into the
/// 64-bit ChaCha stream counter.
pub const MAX_REPLICAS: u64 = 1 << 44;

/// RNG for one replica: ChaCha8 keyed by the master seed, stream selected by
/// the (rung, replica) pair. Rung indices are offset by one so the default
/// stream 0 is never used by replica work.
pub fn replica_rng(master_seed: u64, rung: usize, replica: u64) -> ChaCha8Rng {
    assert!(replica < MAX_REPLICAS, "replica index too large for stream packing");
    assert!((rung as u64) < (1 << 19), "rung index too large for stream packing");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((rung as u64 + 1) << 44) | replica);
    rng
}

/// SplitMix64 finalizer; full-period bijective mixer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent master seed for a numbered subtask (sweep row, toolbox
/// instance, ...). Distinct indexes give unrelated streams even when the
/// master seed is small.
pub fn subtask_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}
