//! Splittable counter-based random numbers for the rounding pipeline.
//!
//! Draws are pure functions of `(seed, restart, iteration, counter)`, so any
//! single draw can be reproduced without replaying a sequence, and iterations
//! within a restart use statistically independent streams. The mixing function
//! is the 64-bit splitmix finalizer.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_A: u64 = 0xD1B5_4A32_D192_ED03;
const STREAM_B: u64 = 0x8CB9_2BA7_2F3D_8DD7;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Root generator keyed by a 64-bit seed.
#[derive(Debug, Clone, Copy)]
pub struct SplitRng {
    seed: u64,
}

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        SplitRng { seed }
    }

    /// Derives the independent stream for `(restart, iteration)`.
    pub fn stream(&self, restart: u64, iteration: u64) -> RngStream {
        let k = mix(self.seed);
        let k = mix(k ^ restart.wrapping_mul(STREAM_A));
        let k = mix(k ^ iteration.wrapping_mul(STREAM_B));
        RngStream { key: k }
    }
}

/// One stream of the generator; draws are indexed by an explicit counter.
#[derive(Debug, Clone, Copy)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    /// Uniform value in `[0, 1)` for the given counter (e.g. a set index).
    pub fn uniform(&self, counter: u64) -> f64 {
        let bits = mix(self.key ^ counter.wrapping_mul(GOLDEN));
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
