//! Seeded, splittable random streams.
//!
//! Every Monte-Carlo draw in the crate is made from a [`ChaCha8Rng`] obtained
//! from a [`SeedStream`]. A stream is addressed by `(seed, tag, block)`: the
//! `tag` separates independent experiments sharing a user seed and the
//! `block` indexes fixed-size chunks of a sample. Because block boundaries do
//! not depend on the number of worker threads, results are bit-identical for
//! any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use rand_chacha::ChaCha8Rng as PhimixRng;

/// Number of draws produced from one block stream.
pub const BLOCK_SIZE: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream, e.g. one per θ value.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(1))),
        }
    }

    /// Generator for block `block` of this stream.
    pub fn rng(&self, block: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block);
        rng
    }

    /// Draws `n` values with `draw`, block by block, on `workers` threads.
    ///
    /// The output is ordered by draw index and does not depend on `workers`.
    pub fn sample<T, F>(&self, n: usize, workers: usize, draw: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng) -> T + Sync,
    {
        let blocks = n.div_ceil(BLOCK_SIZE);
        let run_block = |b: usize| {
            let mut rng = self.rng(b as u64);
            let len = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<T>>()
        };
        let chunks: Vec<Vec<T>> = if workers <= 1 || blocks <= 1 {
            (0..blocks).map(run_block).collect()
        } else {
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => pool.install(|| (0..blocks).into_par_iter().map(run_block).collect()),
                Err(_) => (0..blocks).map(run_block).collect(),
            }
        };
        chunks.into_iter().flatten().collect()
    }
}
