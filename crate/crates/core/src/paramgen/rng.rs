use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Splittable seed handle.
///
/// Every random draw in the crate comes from a `ChaCha8Rng` seeded through
/// [`RngStream::rng`]. Child streams are derived with a SplitMix64 mix of
/// `(seed, index)`, so any unit of work (trial, grid cell, fold, node) owns a
/// stream that depends only on its indices and never on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            seed: splitmix64(splitmix64(self.seed) ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA) ^ 0x5851_F42D_4C95_7F2D)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&self, items: &mut [T]) {
        let mut rng = self.rng();
        for i in (1..items.len()).rev() {
            let j = rng.gen_range(0..=i as u64) as usize;
            items.swap(i, j);
        }
    }
}

/// Uniform draw on `[lo, hi)`; returns `lo` when the interval is empty.
pub(crate) fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    lo + (hi - lo) * u
}

/// Uniform index in `0..n`.
pub(crate) fn index(rng: &mut impl Rng, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}
