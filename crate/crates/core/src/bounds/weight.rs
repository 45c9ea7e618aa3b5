//! Fully connected Gaussian-kernel graphs.

use super::delta::{floor_from, large_n_conditions};
use super::{clique_region, component_measures, size_at_least_two_from, BoundOptions, BoundReport, Precondition};
use crate::error::{Error, Result};
use crate::graph::WeightModel;
use crate::mixture::{HiddenLabeling, MixtureSpec};
use crate::regions::Region;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

fn common_sigma(spec: &MixtureSpec) -> Result<f64> {
    spec.common_stddev().ok_or_else(|| Error::UnsupportedSetting("kernel-graph results need one common standard deviation".into()))
}

/// Large-n conditions for kernel graphs:
/// `ν̄(B∩S) > ½ν̄(B)` and `(2/9)e^{−Δ²/2σ²}ν̄(B)² > cut energy of S`,
/// with B of diameter Δ and the kernel bandwidth equal to the common σ.
pub fn conditions_large_n_weight(spec: &MixtureSpec, k: usize, delta: f64, s: &Region, opts: &BoundOptions) -> Result<[Precondition; 2]> {
    let sigma = common_sigma(spec)?;
    let b = clique_region(spec, k, delta, opts.shape)?;
    let scale = 2.0 / 9.0 * (-delta * delta / (2.0 * sigma * sigma)).exp();
    large_n_conditions(spec, &b, s, WeightModel::GaussianKernel(sigma), scale, &opts.numeric)
}

/// Which side of a cut point the cut set lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `(−∞, c]`
    Below,
    /// `(c, ∞)`
    Above,
}

/// E exp(−(X−c)²/2σ²) for X ~ N(μ, σ²).
pub fn kernel_expectation(mean: f64, sigma: f64, c: f64) -> f64 {
    (-(mean - c).powi(2) / (4.0 * sigma * sigma)).exp() / SQRT_2
}

/// Finite-n bound for kernel graphs on the line with a threshold cut.
pub fn bound_small_n_weight(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    k: usize,
    delta: f64,
    c: f64,
    side: Side,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    if spec.dimension() != 1 {
        return Err(Error::UnsupportedSetting(format!("threshold cuts need dimension 1, got {}", spec.dimension())));
    }
    let sigma = common_sigma(spec)?;
    let mu = spec.component(k)?.mean[0];
    let inside = match side {
        Side::Below => mu + delta / 2.0 <= c,
        Side::Above => mu - delta / 2.0 > c,
    };
    if !inside {
        let slack = match side {
            Side::Below => c - (mu + delta / 2.0),
            Side::Above => (mu - delta / 2.0) - c,
        };
        return Err(Error::PreconditionFailed { condition: "clique interval inside cut", slack });
    }
    let interval = Region::Interval { lo: mu - delta / 2.0, hi: mu + delta / 2.0 };
    let nus = component_measures(spec, &interval, &opts.numeric)?;
    let counts = labeling.counts();
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let nu_i: f64 = counts.iter().zip(&nus).map(|(&m, v)| m as f64 * v).sum::<f64>() / nf;
    let damp = SQRT_2 / 3.0 * (-delta * delta / (4.0 * sigma * sigma)).exp();
    let leak: f64 =
        counts.iter().zip(spec.components()).map(|(&m, comp)| m as f64 / nf * kernel_expectation(comp.mean[0], sigma, c) / 2.0).sum();
    let pre = Precondition::new("clique outweighs cut", damp * nu_i, leak);
    if !pre.holds {
        return Err(pre.into_error("(√2/3)e^{−Δ²/4σ²}·ν̄(I) > Σ r_k e^{−(μ_k−c)²/4σ²}/(2√2)"));
    }
    let range = 0.5 + damp;
    let hoeffding = -(-nf * 2.0 * pre.slack * pre.slack / (range * range)).exp_m1();
    let correction = 1.0 - size_at_least_two_from(counts, &nus)?;
    Ok(BoundReport::assemble(delta, n, vec![pre], hoeffding, f64::NEG_INFINITY, correction, floor_from(nu_i, n, opts.epsilon)))
}
