//! Counter-based seed derivation.
//!
//! Every random stream of a trial is keyed by `(master_seed, trial_id, stream,
//! extra…)` through SplitMix64 finalization, so adding estimators or axis
//! points never shifts the draws of another stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Paths = 1,
    Combiner = 2,
    Noise = 3,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(splitmix64(master), |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

pub fn stream_rng(master: u64, trial_id: u64, stream: Stream, extra: &[u64]) -> ChaCha8Rng {
    let mut words = vec![trial_id, stream as u64];
    words.extend_from_slice(extra);
    ChaCha8Rng::seed_from_u64(derive_seed(master, &words))
}
