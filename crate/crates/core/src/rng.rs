//! Counter-based random streams.
//!
//! Every random quantity of a trial comes from its own stream keyed by
//! `(seed, trial index, dimension)`. There is no sequential state shared
//! between trials, so trials can run on any number of workers in any order
//! and still see identical draws. Keeping dimensions apart also means a
//! parameter that only changes, say, the oracle leaves the channel and CPU
//! draws of every trial untouched (common random numbers).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Independent random dimensions of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Dimension {
    Channel = 1,
    PrimaryCpu = 2,
    HelperCpu = 3,
    Oracle = 4,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a list of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(seed ^ GOLDEN), |acc, &label| {
        mix64(acc.wrapping_add(GOLDEN).wrapping_add(mix64(label)))
    })
}

/// The stream for one `(trial, dimension)` pair.
pub fn trial_stream(seed: u64, trial: u64, dim: Dimension) -> TrialRng {
    let key = derive_seed(seed, &[dim as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}
