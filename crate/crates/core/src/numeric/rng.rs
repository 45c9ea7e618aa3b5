//! Counter-based random streams: every (seed, stream) pair gets its own
//! ChaCha keystream, so results never depend on iteration order.

use super::normal::std_inv_cdf;
use super::qmc::unit_open;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// Independent generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
pub fn uniform_open<R: RngCore>(rng: &mut R) -> f64 {
    unit_open(rng.next_u64())
}

/// Uniform integer in `lo..=hi`.
#[inline]
pub fn uniform_index<R: RngCore>(rng: &mut R, lo: usize, hi: usize) -> usize {
    let span = (hi - lo + 1) as u64;
    // multiply-shift keeps the bias below 2^-64·span
    lo + ((rng.next_u64() as u128 * span as u128) >> 64) as usize
}

/// Standard normal variate by inversion.
#[inline]
pub fn std_normal<R: RngCore>(rng: &mut R) -> f64 {
    std_inv_cdf(uniform_open(rng))
}
