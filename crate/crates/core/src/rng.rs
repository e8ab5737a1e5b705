//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! job's master seed and positioned on a 64-bit stream derived from
//! `(stream tag, sample index)`. A sample's randomness therefore depends only
//! on its coordinates, never on which worker thread produced it or in which
//! order, so serial and parallel runs agree bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream tags. Distinct tags never share a ChaCha stream for the same index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    InnerA = 2,
    InnerB = 3,
    Permutation = 4,
    PairClass = 5,
    PairInputA = 6,
    PairInputB = 7,
    NetInit = 8,
    Batch = 9,
    Noise = 10,
    TestSet = 11,
    Orbit = 12,
    Corpus = 13,
    Dataset = 14,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for sample `index` of `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(splitmix64(stream as u64) ^ index));
    rng
}

/// Generator for a two-level index such as `(step, sample)`.
pub fn stream_rng2(seed: u64, stream: Stream, outer: u64, inner: u64) -> ChaCha8Rng {
    stream_rng(seed, stream, splitmix64(outer).wrapping_add(inner))
}

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Fills `out` with uniform ±1 entries, 64 coordinates per draw.
pub fn fill_signs<R: Rng + ?Sized>(rng: &mut R, out: &mut [i8]) {
    for chunk in out.chunks_mut(64) {
        let bits: u64 = rng.random();
        for (i, s) in chunk.iter_mut().enumerate() {
            *s = if (bits >> i) & 1 == 1 { -1 } else { 1 };
        }
    }
}
