//! Deterministic, splittable random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by
//! `(master seed, stream id)`. Work is always split into a fixed number of
//! shards, each owning one stream, so results do not depend on how many
//! threads evaluate the shards.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Shard count for Monte-Carlo loops.
pub const MC_SHARDS: u64 = 64;

/// Stream ids at or above this value are reserved for scalar draws
/// (e.g. the Poisson point count) so they never collide with shard streams.
pub const RESERVED_STREAM_BASE: u64 = 1 << 60;

pub fn stream(seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Splits `total` draws into `shards` contiguous counts.
pub fn shard_sizes(total: u64, shards: u64) -> Vec<u64> {
    let base = total / shards;
    let extra = total % shards;
    (0..shards).map(|i| base + u64::from(i < extra)).collect()
}
