//! Counter-based random numbers keyed by beam identity.
//!
//! Every variate is a pure function of `(seed, frame_id, channel, azimuth_index, draw)`,
//! so beams can be evaluated in any order, on any number of threads, and still see
//! the same numbers. The mixer is the SplitMix64 finalizer applied to each key word
//! in turn; it is not cryptographic.

use std::f64::consts::TAU;

/// Draw index of the free-path uniform.
pub const DRAW_SCATTER: u32 = 0;
/// Draw index of the range-noise normal.
pub const DRAW_RANGE_NOISE: u32 = 1;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Random stream of a single beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64, frame_id: u64, channel: u16, azimuth_index: u32) -> Self {
        let mut h = mix(seed.wrapping_add(GOLDEN));
        h = mix(h ^ frame_id.wrapping_mul(GOLDEN));
        h = mix(h ^ (((channel as u64) << 32) | azimuth_index as u64));
        Self { key: h }
    }

    /// Raw 64-bit word `word` of draw `draw`.
    #[inline]
    pub fn bits(&self, draw: u32, word: u32) -> u64 {
        mix(self.key ^ mix((((draw as u64) << 32) | word as u64).wrapping_add(GOLDEN)))
    }

    /// Uniform variate strictly inside `(0, 1)`.
    #[inline]
    pub fn uniform(&self, draw: u32) -> f64 {
        open_unit(self.bits(draw, 0))
    }

    /// Standard normal variate (Box–Muller on two words of the same draw).
    pub fn normal(&self, draw: u32) -> f64 {
        let u1 = open_unit(self.bits(draw, 0));
        let u2 = open_unit(self.bits(draw, 1));
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}

/// Maps the top 52 bits to `(k + 0.5) / 2^52`, never 0 or 1.
#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
