//! Conditions over every event of a cut family, and the smallest mean
//! distance at which they all hold.

use super::delta::mean_measure_inside;
use super::threshold::{argmin_mean_density_1d, smallest_feasible};
use super::{clique_region, optimize_scalar, BoundOptions, CutAssignment};
use crate::error::{Error, Result};
use crate::graph::WeightModel;
use crate::mixture::{MixtureSpec, Which};
use crate::regions::{self, measure_with, require_exact, NumericOptions, Region};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// Majority and order conditions, δ-neighborhood graph.
    LargeNDelta,
    /// Majority and order conditions, Gaussian kernel graph (parameter Δ).
    LargeNWeight,
    /// Containment `B ⊆ S` and `2√2·ν̄(B) > 3·ν̄(A)`.
    SmallNDelta,
}

/// Smallest slack over every event of the family at parameter `p`.
/// A clique region sticking out of its cut fails with `PreconditionFailed`.
pub fn family_slack(spec: &MixtureSpec, cuts: &CutAssignment, kind: ThresholdKind, p: f64, opts: &BoundOptions) -> Result<f64> {
    let numeric = &opts.numeric;
    let mut energies: Vec<(Region, f64)> = Vec::new();
    let mut energy_of = |pair: Region, model: WeightModel| -> Result<f64> {
        if let Some((_, e)) = energies.iter().find(|(r, _)| *r == pair) {
            return Ok(*e);
        }
        // the cut energy of S and of its complement agree
        let e = regions::cut_energy_with(spec, &pair, model, numeric)?.value;
        energies.push((pair, e));
        Ok(e)
    };
    let mut worst = f64::INFINITY;
    for (a, b) in cuts.events() {
        let s = cuts.cut(a, b)?;
        let clique = clique_region(spec, a, p, opts.shape)?;
        let nu_b = measure_with(spec, &clique, Which::Mean, numeric)?.value;
        let slack = match kind {
            ThresholdKind::LargeNDelta | ThresholdKind::LargeNWeight => {
                let (model, scale) = if kind == ThresholdKind::LargeNDelta {
                    (WeightModel::DeltaNeighborhood(p), 2.0 / 9.0)
                } else {
                    let sigma = spec
                        .common_stddev()
                        .ok_or_else(|| Error::UnsupportedSetting("kernel-graph results need one common standard deviation".into()))?;
                    (WeightModel::GaussianKernel(sigma), 2.0 / 9.0 * (-p * p / (2.0 * sigma * sigma)).exp())
                };
                let majority = mean_measure_inside(spec, &clique, &s, numeric)? - 0.5 * nu_b;
                let order = scale * nu_b * nu_b - energy_of(cuts.cut(a.min(b), a.max(b))?, model)?;
                majority.min(order)
            }
            ThresholdKind::SmallNDelta => {
                if !regions::is_subset(&clique, &s)? {
                    return Err(Error::PreconditionFailed { condition: "clique region inside cut", slack: f64::NAN });
                }
                let zone = regions::boundary_zone(&s, p)?;
                let nu_a = require_exact(measure_with(spec, &zone, Which::Mean, numeric)?, "boundary zone")?.value;
                2.0 * SQRT_2 * nu_b - 3.0 * nu_a
            }
        };
        worst = worst.min(slack);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub bound: BoundOptions,
    /// Budget for re-evaluating the slack at the chosen parameter; the
    /// parameter search itself runs with `bound.numeric`.
    pub confirm: Option<NumericOptions>,
    /// Bisection tolerance in λ.
    pub tolerance: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { bound: BoundOptions::default(), confirm: None, tolerance: 1e-3 }
    }
}

/// Smallest feasible λ with the parameter that achieves it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub lambda: f64,
    pub parameter: f64,
    pub slack: f64,
}

/// Best slack over the parameter grid at one λ, and the maximizing parameter.
pub fn best_family_slack(
    spec: &MixtureSpec,
    cuts: &CutAssignment,
    kind: ThresholdKind,
    grid: &[f64],
    opts: &ThresholdOptions,
) -> Result<(f64, f64)> {
    let (p, slack) = match optimize_scalar(grid, |p| family_slack(spec, cuts, kind, p, &opts.bound).map(|s| (s, s))) {
        Ok(r) => r,
        Err(Error::NotFound(_)) => return Ok((f64::NAN, f64::NEG_INFINITY)),
        Err(e) => return Err(e),
    };
    match &opts.confirm {
        Some(numeric) => {
            let bound = BoundOptions { numeric: *numeric, ..opts.bound };
            Ok((p, family_slack(spec, cuts, kind, p, &bound)?))
        }
        None => Ok((p, slack)),
    }
}

/// Smallest λ on `lambda_grid` (refined by bisection) at which some
/// parameter from `param_grid(λ)` makes every event of the family feasible.
pub fn family_threshold<S, C, G>(
    spec_at: S,
    cuts_at: C,
    kind: ThresholdKind,
    param_grid: G,
    lambda_grid: &[f64],
    opts: &ThresholdOptions,
) -> Result<ThresholdResult>
where
    S: Fn(f64) -> Result<MixtureSpec>,
    C: Fn(&MixtureSpec) -> Result<CutAssignment>,
    G: Fn(&MixtureSpec, f64) -> Vec<f64>,
{
    let mut seen: Vec<ThresholdResult> = Vec::new();
    let lambda = smallest_feasible(
        |l| {
            let spec = spec_at(l)?;
            let cuts = cuts_at(&spec)?;
            let (p, slack) = best_family_slack(&spec, &cuts, kind, &param_grid(&spec, l), opts)?;
            seen.push(ThresholdResult { lambda: l, parameter: p, slack });
            Ok(slack)
        },
        lambda_grid,
        opts.tolerance,
    )?;
    seen.into_iter()
        .find(|r| r.lambda == lambda)
        .ok_or_else(|| Error::InvariantViolated("threshold search lost its final evaluation".into()))
}

/// `(−∞, c]` against `(c, ∞)` on the line, with c the density minimizer between the two means.
pub fn density_valley_cut(spec: &MixtureSpec) -> Result<CutAssignment> {
    if spec.len() != 2 {
        return Err(Error::UnsupportedSetting(format!("valley cut needs two components, got {}", spec.len())));
    }
    let (m0, m1) = (spec.components()[0].mean[0], spec.components()[1].mean[0]);
    let (lo, hi) = (m0.min(m1), m0.max(m1));
    let c = argmin_mean_density_1d(spec, lo, hi)?;
    let normal = if m0 <= m1 { 1.0 } else { -1.0 };
    let mut cuts = CutAssignment::new(2);
    cuts.set(0, 1, Region::Halfspace { normal: vec![normal], offset: normal * c })?;
    Ok(cuts)
}
