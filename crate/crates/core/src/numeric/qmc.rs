//! Randomized quasi-Monte Carlo on the Kronecker (R_d) sequence.
//!
//! Points are kept in 64-bit fixed point so that the n-th point is exact for
//! any n < 2^64; each replicate applies an independent Cranley–Patterson
//! shift and the spread of replicate means gives the error estimate.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Point estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }
}

/// Default number of randomized replicates.
pub const REPLICATES: usize = 16;

/// Generalized golden ratio: positive root of x^(d+1) = x + 1.
fn harmonious(dim: usize) -> f64 {
    let mut x: f64 = 2.0;
    let p = (dim + 1) as f64;
    for _ in 0..200 {
        x = (1.0 + x).powf(1.0 / p);
    }
    x
}

#[derive(Debug, Clone)]
pub struct RdSequence {
    alphas: Vec<u64>,
}

impl RdSequence {
    pub fn new(dim: usize) -> Self {
        let g = harmonious(dim);
        let alphas = (1..=dim)
            .map(|j| {
                let a = (1.0 / g.powi(j as i32)).fract();
                ((a * 18_446_744_073_709_551_616.0) as u64) | 1
            })
            .collect();
        RdSequence { alphas }
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// Writes the shifted, tent-folded n-th point into `out`, coordinates in (0, 1).
    #[inline]
    pub fn point(&self, n: u64, shift: &[u64], out: &mut [f64]) {
        for ((o, &a), &s) in out.iter_mut().zip(&self.alphas).zip(shift) {
            let u = s.wrapping_add(n.wrapping_mul(a));
            // baker's transform u -> 1 - |2u - 1| on the fixed-point representation
            let t = if u >> 63 == 0 { u << 1 } else { (!u) << 1 };
            *o = unit_open(t);
        }
    }
}

/// Maps 64 random bits to the open interval (0, 1).
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Mean of `f` over `total_points` shifted R_d points split into
/// `replicates` independent replicates. Deterministic given `seed`.
pub fn randomized_mean<F>(dim: usize, total_points: usize, replicates: usize, seed: u64, f: F) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let replicates = replicates.max(2);
    let per = (total_points / replicates).max(1) as u64;
    let seq = RdSequence::new(dim);
    let mut shifts = Vec::with_capacity(replicates);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..replicates {
        shifts.push((0..dim).map(|_| rng.next_u64()).collect::<Vec<_>>());
    }
    let means: Vec<f64> = shifts
        .par_iter()
        .map(|shift| {
            let mut buf = vec![0.0; dim];
            let mut acc = 0.0;
            for n in 0..per {
                seq.point(n, shift, &mut buf);
                acc += f(&buf);
            }
            acc / per as f64
        })
        .collect();
    let r = means.len() as f64;
    let mean = means.iter().sum::<f64>() / r;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Estimate { value: mean, error: (var / r).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_in_open_cube() {
        let s = RdSequence::new(3);
        let mut p = [0.0; 3];
        for n in [0u64, 1, 17, u64::MAX] {
            s.point(n, &[0, u64::MAX, 12345], &mut p);
            assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn integrates_smooth_function() {
        // ∫ x y z over the unit cube = 1/8
        let e = randomized_mean(3, 1 << 16, 16, 7, |p| p[0] * p[1] * p[2]);
        assert!(e.error < 1e-4);
        assert!((e.value - 0.125).abs() < 6.0 * e.error.max(1e-9));
    }

    #[test]
    fn deterministic() {
        let a = randomized_mean(2, 4096, 16, 3, |p| (p[0] - p[1]).abs());
        let b = randomized_mean(2, 4096, 16, 3, |p| (p[0] - p[1]).abs());
        assert_eq!(a, b);
    }
}
