//! Seeded random streams.
//!
//! Every consumer that needs randomness derives its own stream from a
//! `(seed, stream id)` pair, so the result of a computation never depends on
//! the order in which independent pieces of work are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A fresh `u64` seed drawn from stream `stream` of `seed`.
pub fn derive(seed: u64, stream_id: u64) -> u64 {
    use rand::RngCore;
    stream(seed, stream_id).next_u64()
}

/// Plain generator for `seed` (stream 0).
pub fn seeded(seed: u64) -> Rng {
    stream(seed, 0)
}
