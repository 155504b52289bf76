//! Seeded random streams.
//!
//! Every draw in the crate comes from one 64-bit seed. A [`Stream`] names
//! what the numbers are for, and each purpose gets its own ChaCha8 stream,
//! so adding draws for one layer never shifts the numbers of another.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Prior means of parametric layer `i`.
    Prior(u32),
    /// Batch and example order of epoch `e`.
    Shuffle(u32),
    /// Synthetic data.
    Data,
    /// Random subsets.
    Subset,
    /// Synthetic noise images.
    Noise,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Prior(i) => (1 << 32) | i as u64,
            Stream::Shuffle(e) => (2 << 32) | e as u64,
            Stream::Data => 3 << 32,
            Stream::Subset => 4 << 32,
            Stream::Noise => 5 << 32,
        }
    }
}

/// Generator for `purpose` under `seed`.
pub fn stream(seed: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose.id());
    rng
}

/// `n` distinct indices below `len` (all of them if `n >= len`), sorted.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Vec<usize> {
    if n >= len {
        return (0..len).collect();
    }
    let mut idx = index::sample(&mut stream(seed, Stream::Subset), len, n).into_vec();
    idx.sort_unstable();
    idx
}
