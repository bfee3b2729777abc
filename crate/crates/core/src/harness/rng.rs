//! One master seed, split into independent named streams. ChaCha's 64-bit
//! stream id keeps arrivals, policy randomness and model noise apart, so
//! swapping the policy never perturbs the arrival sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Arrivals,
    Policy,
    Model,
    Audit,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Arrivals => 1,
            Stream::Policy => 2,
            Stream::Model => 3,
            Stream::Audit => 4,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
