//! Seed handling shared by every stochastic routine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for a master seed.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-seed for replicate `stream` of a run seeded with `master`.
///
/// Replicates seeded this way may run in any order or on any thread and still
/// reproduce the sequential result.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Generator for replicate `stream` of `master`.
pub fn substream(master: u64, stream: u64) -> Rng {
    seeded(derive_seed(master, stream))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
