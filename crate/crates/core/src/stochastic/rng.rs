//! Counter-based random streams.
//!
//! Every draw is addressed by `(seed, replication, stream, index)`. The four
//! words form a ChaCha8 key, so any draw can be reproduced in isolation and
//! concurrent replications never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Replication id reserved for expectation sampling.
pub const EXPECTATION_REPLICATION: u64 = u64::MAX;

/// First stream id used by shared streams; per-node streams use the node index.
pub const SHARED_STREAM_BASE: u64 = 1 << 32;

pub fn draw_rng(seed: u64, replication: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([seed, replication, stream, index])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
