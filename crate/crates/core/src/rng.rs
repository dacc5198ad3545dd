//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` with its 64-bit stream
//! word set to `stream`. Distinct `(seed, stream)` pairs give independent
//! sequences, and the sequence for a pair does not depend on which thread
//! consumes it, so replicate `k` of a simulation always sees stream `k`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
