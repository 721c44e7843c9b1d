//! Counter-based, splittable random streams.
//!
//! A stream is a ChaCha8 keystream keyed by `seed` and positioned on the
//! 64-bit `stream_id` nonce. Two streams with equal `(seed, stream_id)` produce
//! identical draws; distinct ids index disjoint keystreams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Role tags used when deriving per-trial streams.
pub mod role {
    pub const DATA: u64 = 0x6461_7461;
    pub const SOLVER: u64 = 0x736f_6c76;
    pub const EVAL: u64 = 0x6576_616c;
    pub const SELECT: u64 = 0x7365_6c63;
    pub const SHARD: u64 = 0x7368_7264;
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 finalizer; bijective on u64.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    /// Stream for one `(trial, role)` pair under a master seed.
    pub fn derive(master_seed: u64, trial_index: u64, role_tag: u64) -> Self {
        let id = mix64(mix64(trial_index) ^ role_tag.rotate_left(17));
        Self::new(master_seed, id)
    }

    /// Child stream; the parent is left untouched.
    pub fn fork(&self, tag: u64) -> Self {
        Self::new(self.seed, mix64(self.stream_id ^ mix64(tag)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform draw in the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * INV_2_53
    }

    /// Standard Gumbel draw.
    #[inline]
    pub fn gumbel(&mut self) -> f64 {
        -(-self.uniform_open().ln()).ln()
    }

    /// Uniform index in `0..n`; `n` must be positive.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift; bias is below 2^-64 * n.
        ((self.inner.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
