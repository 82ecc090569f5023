//! Deterministic RNG streams.
//!
//! Every stochastic component derives its own ChaCha stream from the run seed
//! plus a structural address (purpose, subject, channel/epoch), so outputs are
//! bit-identical for a given seed regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type MicRng = ChaCha8Rng;

/// What a substream is used for; keeps streams from colliding.
#[derive(Clone, Copy, Debug)]
pub enum StreamKind {
    SignalInnovations = 1,
    StateSwitching = 2,
    LabelPlanting = 3,
    Chain = 4,
    Init = 5,
    Selection = 6,
}

/// Root RNG for a run.
pub fn seeded(seed: u64) -> MicRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream addressed by `(kind, a, b)`.
///
/// `a` and `b` must fit in 24 bits each, which covers subjects, channels and
/// epochs by a wide margin.
pub fn substream(seed: u64, kind: StreamKind, a: usize, b: usize) -> MicRng {
    debug_assert!(a < (1 << 24) && b < (1 << 24));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 48) | ((a as u64) << 24) | b as u64);
    rng
}
