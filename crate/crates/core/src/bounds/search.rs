//! Choosing δ or Δ to maximize a bound.

use super::{bound_small_n_delta, bound_small_n_weight, incomparability_bound, BoundOptions, BoundReport, CutAssignment, EventBound, Side};
use crate::error::{Error, Result};
use crate::mixture::{HiddenLabeling, MixtureSpec};
use crate::numeric::optimize::golden_max;
use crate::regions::Region;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Maximizes `eval(p).0` over a grid, then refines once by golden section
/// between the neighbours of the best grid point. Parameters whose
/// evaluation fails a precondition score −∞; ties go to the smallest parameter.
pub fn optimize_scalar<T, F>(grid: &[f64], eval: F) -> Result<(f64, T)>
where
    T: Send,
    F: Fn(f64) -> Result<(f64, T)> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty parameter grid".into()));
    }
    let mut points: Vec<f64> = grid.to_vec();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let feasible = |p: f64| -> Result<Option<(f64, T)>> {
        match eval(p) {
            Ok((score, t)) if !score.is_nan() => Ok(Some((score, t))),
            Ok(_) | Err(Error::PreconditionFailed { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let results: Vec<Option<(f64, T)>> = points.par_iter().map(|&p| feasible(p)).collect::<Result<_>>()?;
    let mut best: Option<(usize, f64, T)> = None;
    for (i, r) in results.into_iter().enumerate() {
        if let Some((score, t)) = r {
            if best.as_ref().is_none_or(|b| score > b.1) {
                best = Some((i, score, t));
            }
        }
    }
    let Some((i, score, t)) = best else {
        return Err(Error::NotFound(format!("no feasible parameter among {} grid points", points.len())));
    };
    let lo = points[i.saturating_sub(1)];
    let hi = points[(i + 1).min(points.len() - 1)];
    if lo < hi {
        let tol = (hi - lo) * 1e-3;
        let (x, fx) = golden_max(|p| feasible(p).ok().flatten().map_or(f64::NEG_INFINITY, |r| r.0), lo, hi, tol);
        if fx > score {
            if let Some((s, tx)) = feasible(x)? {
                if s > score {
                    return Ok((x, tx));
                }
            }
        }
    }
    Ok((points[i], t))
}

/// What [`optimize_radius`] maximizes.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiusTarget<'a> {
    /// δ-neighborhood bound for a cut region.
    Delta { cut: &'a Region },
    /// Kernel bound for a threshold cut on the line.
    Weight { cut_point: f64, side: Side },
}

/// Best δ (or Δ) for one event's finite-n bound, ranked by the unclamped bound.
pub fn optimize_radius(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    k: usize,
    target: RadiusTarget<'_>,
    grid: &[f64],
    opts: &BoundOptions,
) -> Result<(f64, BoundReport)> {
    optimize_scalar(grid, |p| {
        let r = match &target {
            RadiusTarget::Delta { cut } => bound_small_n_delta(spec, labeling, k, p, cut, opts)?,
            RadiusTarget::Weight { cut_point, side } => bound_small_n_weight(spec, labeling, k, p, *cut_point, *side, opts)?,
        };
        Ok((r.raw, r))
    })
}

/// All event bounds of a cut family at one δ and their union bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncomparabilityReport {
    pub delta: f64,
    pub events: Vec<EventBound>,
    pub combined: f64,
}

impl IncomparabilityReport {
    pub fn evaluate(spec: &MixtureSpec, labeling: &HiddenLabeling, cuts: &CutAssignment, delta: f64, opts: &BoundOptions) -> Result<Self> {
        let events = cuts
            .events()
            .into_iter()
            .map(|(a, b)| {
                let report = bound_small_n_delta(spec, labeling, a, delta, &cuts.cut(a, b)?, opts)?;
                Ok(EventBound { clique: a, other: b, report })
            })
            .collect::<Result<Vec<_>>>()?;
        let combined = incomparability_bound(&events, cuts)?;
        Ok(IncomparabilityReport { delta, events, combined })
    }

    /// Union bound without clamping, for ranking.
    pub fn raw(&self) -> f64 {
        1.0 - self.events.iter().map(|e| 1.0 - e.report.raw.min(1.0)).sum::<f64>()
    }
}

/// Best common δ for the union bound over every event of a cut family.
pub fn optimize_incomparability_delta(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    cuts: &CutAssignment,
    grid: &[f64],
    opts: &BoundOptions,
) -> Result<(f64, IncomparabilityReport)> {
    optimize_scalar(grid, |d| {
        let r = IncomparabilityReport::evaluate(spec, labeling, cuts, d, opts)?;
        Ok((r.raw(), r))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::Ratio;

    #[test]
    fn single_feasible_point() {
        let (p, v) = optimize_scalar(&[0.7], |p| Ok((p, p * 2.0))).unwrap();
        assert_eq!((p, v), (0.7, 1.4));
    }

    #[test]
    fn infeasible_everywhere() {
        let r = optimize_scalar(&[1.0, 2.0], |_| -> Result<(f64, ())> { Err(Error::PreconditionFailed { condition: "x", slack: -1.0 }) });
        assert!(matches!(r, Err(Error::NotFound(_))));
    }

    #[test]
    fn ties_prefer_smallest() {
        let (p, _) = optimize_scalar(&[3.0, 1.0, 2.0], |_| Ok((1.0, ()))).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn refinement_beats_grid() {
        let (p, _) = optimize_scalar(&[0.0, 1.0, 2.0, 3.0], |x| Ok((-(x - 1.37f64).powi(2), ()))).unwrap();
        assert!((p - 1.37).abs() < 5e-3);
    }

    #[test]
    fn optimized_delta_dominates_grid() {
        let spec = MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), 5.0, 1.0).unwrap();
        let l = HiddenLabeling::canonical(&spec, 900).unwrap();
        let s = Region::Halfspace { normal: vec![1.0], offset: 2.5 };
        let grid: Vec<f64> = (1..=24).map(|i| 0.1 * i as f64).collect();
        let opts = BoundOptions::default();
        let (d, best) = optimize_radius(&spec, &l, 0, RadiusTarget::Delta { cut: &s }, &grid, &opts).unwrap();
        assert!(d > 0.0);
        for &g in &grid {
            if let Ok(r) = bound_small_n_delta(&spec, &l, 0, g, &s, &opts) {
                assert!(best.raw >= r.raw - 1e-12, "δ={g}");
            }
        }
    }
}
