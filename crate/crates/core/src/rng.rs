//! Random streams.
//!
//! Every stochastic routine takes an explicit [`SimRng`]. The generator is
//! ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), keyed from a 64-bit seed
//! through `SeedableRng::seed_from_u64`. Independent substreams are derived by
//! mixing a parent seed with an index through [`mix64`], a SplitMix64-style
//! finalizer, so that replica `r` of an experiment seeded with `s` always
//! draws from `substream(s, r)` regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a parent seed and an index into a child seed.
///
/// `mix64(s, i) = splitmix64(s ^ splitmix64(i))`. Distinct indices give
/// unrelated child seeds; the map is a pure function of its inputs.
pub fn mix64(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub fn stream(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> SimRng {
    stream(mix64(seed, index))
}

/// Runs `count` replicas in parallel on the current rayon pool.
///
/// Replica `r` receives `substream(seed, r)`; the output is ordered by
/// replica index, so results do not depend on the number of worker threads.
pub fn replicate<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            f(r, &mut rng)
        })
        .collect()
}
