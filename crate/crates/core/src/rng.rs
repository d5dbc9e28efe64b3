//! Deterministic counter-based substreams.
//!
//! Every Monte-Carlo draw in this crate pulls from its own ChaCha stream
//! keyed by `(seed, stream index)`. Draw i of a run always sees the same
//! bits no matter how the draws are scheduled across threads, which is what
//! makes results bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` of the family keyed by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for draw `draw` inside grid cell `cell`.
///
/// Sweeps give each grid point its own block of 2^32 draw streams; both
/// indices must stay below 2^32.
pub fn cell_stream(cell: usize, draw: usize) -> u64 {
    debug_assert!(cell < (1 << 32) && draw < (1 << 32));
    ((cell as u64) << 32) | draw as u64
}
