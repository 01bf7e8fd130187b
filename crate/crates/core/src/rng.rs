//! Counter-keyed random streams: every draw is a pure function of `(seed, restart, iteration)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn keyed(seed: u64, restart: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((restart << 32) ^ iteration);
    rng
}
