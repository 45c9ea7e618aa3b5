//! Preconditions, probability lower bounds, moment formulas and
//! separability thresholds.

mod delta;
mod family;
mod search;
mod threshold;
mod weight;

pub use delta::{bound_from_measures, bound_small_n_delta, conditions_large_n_delta, order_floor, zone_measures, ZoneMeasures};
pub use family::{best_family_slack, density_valley_cut, family_slack, family_threshold, ThresholdKind, ThresholdOptions, ThresholdResult};
pub use search::{optimize_incomparability_delta, optimize_radius, optimize_scalar, IncomparabilityReport, RadiusTarget};
pub use threshold::{argmin_mean_density_1d, lemma_gap_1d, min_separable_lambda_1d, smallest_feasible, SeparabilityCondition};
pub use weight::{bound_small_n_weight, conditions_large_n_weight, kernel_expectation, Side};

use crate::error::{Error, Result};
use crate::graph::WeightModel;
use crate::mixture::{HiddenLabeling, MixtureSpec, Which};
use crate::numeric::normal::std_cdf;
use crate::regions::{self, measure_with, NumericOptions, Region};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Berry–Esseen constant for independent, not identically distributed summands.
pub const BERRY_ESSEEN_C: f64 = 0.5591;

/// A named inequality with `slack = left − right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub name: String,
    pub holds: bool,
    pub slack: f64,
}

impl Precondition {
    pub fn new(name: &str, left: f64, right: f64) -> Self {
        Precondition { name: name.to_string(), holds: left > right, slack: left - right }
    }

    /// Error describing this failed inequality.
    pub(crate) fn into_error(self, condition: &'static str) -> Error {
        Error::PreconditionFailed { condition, slack: self.slack }
    }
}

/// Evaluated bound for one event "the clique tangle contains V_S".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// δ for neighborhood graphs, Δ for kernel graphs.
    pub parameter: f64,
    pub n: u64,
    pub preconditions: Vec<Precondition>,
    pub hoeffding: f64,
    /// `-inf` where the branch does not apply.
    pub berry_esseen: f64,
    /// `1 − P(|V_B| ≥ 2)`.
    pub size_correction: f64,
    /// `max(branches) − size_correction`, unclamped.
    pub raw: f64,
    /// `raw` clamped to [0, 1].
    pub combined: f64,
    pub order_floor: f64,
}

impl BoundReport {
    pub(crate) fn assemble(
        parameter: f64,
        n: u64,
        preconditions: Vec<Precondition>,
        hoeffding: f64,
        berry_esseen: f64,
        size_correction: f64,
        order_floor: f64,
    ) -> Self {
        let raw = hoeffding.max(berry_esseen) - size_correction;
        BoundReport {
            parameter,
            n,
            preconditions,
            hoeffding,
            berry_esseen,
            size_correction,
            raw,
            combined: raw.clamp(0.0, 1.0),
            order_floor,
        }
    }
}

/// Shape of the clique region around a mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CliqueShape {
    Ball,
    /// Largest cube inside the ball: side δ/√d, same diameter.
    Cube,
    /// Ball up to dimension three, cube above.
    #[default]
    Auto,
}

/// Options shared by the bound evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    pub shape: CliqueShape,
    /// ε of the order floor (1 − ε)·n²·(2/9)·ν̄(B)².
    pub epsilon: f64,
    pub numeric: NumericOptions,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { shape: CliqueShape::Auto, epsilon: 0.1, numeric: NumericOptions::default() }
    }
}

/// Clique region of diameter `diameter` around the mean of component `k`.
pub fn clique_region(spec: &MixtureSpec, k: usize, diameter: f64, shape: CliqueShape) -> Result<Region> {
    let d = spec.dimension();
    let cube = match shape {
        CliqueShape::Ball => false,
        CliqueShape::Cube => true,
        CliqueShape::Auto => d >= 4,
    };
    if cube && d > 1 {
        if !(diameter > 0.0) {
            return Err(Error::InvalidRegion(format!("diameter {diameter} must be positive")));
        }
        Ok(Region::cube(&spec.component(k)?.mean, diameter / (2.0 * (d as f64).sqrt())))
    } else {
        regions::ball_around_mean(spec, k, diameter)
    }
}

/// Per-component measures ν_k(region).
pub fn component_measures(spec: &MixtureSpec, region: &Region, opts: &NumericOptions) -> Result<Vec<f64>> {
    (0..spec.len()).map(|k| measure_with(spec, region, Which::Component(k), opts).map(|m| m.value)).collect()
}

/// P(|V_A| ≥ 2) from per-component counts and measures.
pub fn size_at_least_two_from(counts: &[u64], nus: &[f64]) -> Result<f64> {
    let mut log_none = 0.0;
    let mut ratio_sum = 0.0;
    for (k, (&n, &nu)) in counts.iter().zip(nus).enumerate() {
        if nu >= 1.0 {
            if n == 0 {
                continue;
            }
            return Err(Error::InvalidSpec(format!("component {k} puts all its mass in the region")));
        }
        log_none += n as f64 * (-nu).ln_1p();
        ratio_sum += n as f64 * nu / (1.0 - nu);
    }
    // 1 − P(0) − P(1), with P(1) = P(0)·Σ n_k ν_k/(1−ν_k)
    let none = log_none.exp();
    Ok((-(log_none.exp_m1()) - none * ratio_sum).clamp(0.0, 1.0))
}

/// P(|V_A| ≥ 2) = 1 − (1 + Σ n_k ν_k/(1−ν_k))·Π(1−ν_k)^{n_k}.
pub fn size_at_least_two(spec: &MixtureSpec, labeling: &HiddenLabeling, region: &Region, opts: &NumericOptions) -> Result<f64> {
    size_at_least_two_from(labeling.counts(), &component_measures(spec, region, opts)?)
}

/// Closed-form moments of |V_A| and κ(V_S).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub second_moment: f64,
    pub kappa_mean: f64,
}

/// E|V_A|, Var|V_A|, E|V_A|² and Eκ(V_S) = n²·(cut energy) − n·(same-label part).
pub fn moment_formulas(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    region: &Region,
    model: WeightModel,
    cut: &Region,
    opts: &NumericOptions,
) -> Result<Moments> {
    let nus = component_measures(spec, region, opts)?;
    let n = labeling.n() as f64;
    let mean: f64 = labeling.counts().iter().zip(&nus).map(|(&c, nu)| c as f64 * nu).sum();
    let variance: f64 = labeling.counts().iter().zip(&nus).map(|(&c, nu)| c as f64 * nu * (1.0 - nu)).sum();
    let energy = regions::cut_energy_with(spec, cut, model, opts)?.value;
    let own = regions::self_energy_with(spec, cut, model, opts)?.value;
    Ok(Moments { mean, variance, second_moment: mean * mean + variance, kappa_mean: n * n * energy - n * own })
}

/// Normal distribution function, re-exported for report consumers.
pub fn phi(z: f64) -> f64 {
    std_cdf(z)
}

/// Cuts `S_{k1,k2}` for every pair of components, with
/// `S_{k2,k1} = complement of S_{k1,k2}` holding by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutAssignment {
    components: usize,
    cuts: BTreeMap<(usize, usize), Region>,
}

impl CutAssignment {
    pub fn new(components: usize) -> Self {
        CutAssignment { components, cuts: BTreeMap::new() }
    }

    /// Sets `S_{k1,k2}`; the reverse orientation becomes its complement.
    pub fn set(&mut self, k1: usize, k2: usize, region: Region) -> Result<()> {
        if k1 == k2 || k1.max(k2) >= self.components {
            return Err(Error::InvalidComponent { index: k1.max(k2), count: self.components });
        }
        let stored = if k1 < k2 { region } else { region.complement() };
        self.cuts.insert((k1.min(k2), k1.max(k2)), stored);
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// `S_{k1,k2}`.
    pub fn cut(&self, k1: usize, k2: usize) -> Result<Region> {
        let r = self.cuts.get(&(k1.min(k2), k1.max(k2))).ok_or(Error::MissingEvent(k1, k2))?;
        Ok(if k1 < k2 { r.clone() } else { r.clone().complement() })
    }

    /// Ordered events `(k1, k2)`: both orientations of every pair.
    pub fn events(&self) -> Vec<(usize, usize)> {
        let m = self.components;
        (0..m).flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b))).collect()
    }

    /// Halfspace through the midpoint of two means, oriented towards the first.
    pub fn midpoint_halfspaces(spec: &MixtureSpec) -> Result<Self> {
        let mut out = CutAssignment::new(spec.len());
        for a in 0..spec.len() {
            for b in a + 1..spec.len() {
                let (p, q) = (&spec.components()[a].mean, &spec.components()[b].mean);
                let u: Vec<f64> = q.iter().zip(p).map(|(x, y)| x - y).collect();
                let mid: f64 = u.iter().zip(p.iter().zip(q)).map(|(ui, (x, y))| ui * (x + y) / 2.0).sum();
                out.set(a, b, Region::halfspace(u, mid)?)?;
            }
        }
        Ok(out)
    }

    /// `S_{k1,k2}` = Voronoi cell of the smaller index.
    pub fn voronoi(spec: &MixtureSpec) -> Result<Self> {
        let sites: Vec<Vec<f64>> = spec.components().iter().map(|c| c.mean.clone()).collect();
        let mut out = CutAssignment::new(spec.len());
        for a in 0..spec.len() {
            for b in a + 1..spec.len() {
                out.set(a, b, Region::Voronoi { site: a, sites: sites.clone() })?;
            }
        }
        Ok(out)
    }

    /// `S_{k1,k2}` = axis cube of the given half-width around the smaller index's mean.
    pub fn cubes(spec: &MixtureSpec, half_width: f64) -> Result<Self> {
        let mut out = CutAssignment::new(spec.len());
        for a in 0..spec.len() {
            for b in a + 1..spec.len() {
                out.set(a, b, Region::cube(&spec.components()[a].mean, half_width))?;
            }
        }
        Ok(out)
    }
}

/// Bound for the event that clique `clique`'s tangle contains `S_{clique,other}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventBound {
    pub clique: usize,
    pub other: usize,
    pub report: BoundReport,
}

/// Union bound `1 − Σ (1 − event bound)` over both orientations of every pair, clamped.
pub fn incomparability_bound(events: &[EventBound], cuts: &CutAssignment) -> Result<f64> {
    let mut deficit = 0.0;
    for (a, b) in cuts.events() {
        let e = events.iter().find(|e| e.clique == a && e.other == b).ok_or(Error::MissingEvent(a, b))?;
        deficit += 1.0 - e.report.combined;
    }
    Ok((1.0 - deficit).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{Component, Ratio};

    fn report(combined: f64) -> BoundReport {
        BoundReport::assemble(1.0, 10, vec![], combined, f64::NEG_INFINITY, 0.0, 0.0)
    }

    #[test]
    fn binomial_pair_probability() {
        // Binomial(3, ½) tail P(X ≥ 2) = 4/8
        assert!((size_at_least_two_from(&[3], &[0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(size_at_least_two_from(&[3, 4], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(size_at_least_two_from(&[3], &[1.0]).is_err());
    }

    #[test]
    fn pair_probability_grows_with_n() {
        let mut last = 0.0;
        for n in [2u64, 5, 10, 50, 200] {
            let p = size_at_least_two_from(&[n], &[0.05]).unwrap();
            assert!(p > last);
            last = p;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn union_bound_arithmetic() {
        let spec = MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), 4.0, 1.0).unwrap();
        let cuts = CutAssignment::midpoint_halfspaces(&spec).unwrap();
        let ev = |a, b, v| EventBound { clique: a, other: b, report: report(v) };
        assert_eq!(incomparability_bound(&[ev(0, 1, 1.0), ev(1, 0, 1.0)], &cuts).unwrap(), 1.0);
        assert!((incomparability_bound(&[ev(0, 1, 0.9), ev(1, 0, 0.9)], &cuts).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(incomparability_bound(&[ev(0, 1, 0.9)], &cuts), Err(Error::MissingEvent(1, 0)));
    }

    #[test]
    fn cut_complement_convention() {
        let spec = MixtureSpec::equilateral(4.0).unwrap();
        let cuts = CutAssignment::voronoi(&spec).unwrap();
        assert_eq!(cuts.cut(2, 0).unwrap(), cuts.cut(0, 2).unwrap().complement());
        assert_eq!(cuts.events().len(), 6);
        let mid = CutAssignment::midpoint_halfspaces(&MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), 4.0, 1.0).unwrap()).unwrap();
        assert!(mid.cut(0, 1).unwrap().contains(&[1.9]).unwrap());
        assert!(mid.cut(1, 0).unwrap().contains(&[2.1]).unwrap());
    }

    #[test]
    fn moments_of_halfspace_through_mean() {
        let spec = MixtureSpec::new(1, vec![Component { ratio: Ratio::new(1, 1).unwrap(), mean: vec![0.0], stddev: 1.0 }]).unwrap();
        let l = HiddenLabeling::canonical(&spec, 100).unwrap();
        let h = Region::halfspace(vec![1.0], 0.0).unwrap();
        let m = moment_formulas(&spec, &l, &h, WeightModel::DeltaNeighborhood(1.0), &h, &NumericOptions::default()).unwrap();
        assert!((m.mean - 50.0).abs() < 1e-12 && (m.variance - 25.0).abs() < 1e-12);
        let all =
            moment_formulas(&spec, &l, &Region::whole(1), WeightModel::DeltaNeighborhood(1.0), &h, &NumericOptions::default()).unwrap();
        assert_eq!((all.mean, all.variance), (100.0, 0.0));
    }

    #[test]
    fn cube_clique_has_ball_diameter() {
        let spec = MixtureSpec::two_gaussians(4, Ratio::new(1, 2).unwrap(), 4.0, 1.0).unwrap();
        let Region::Box { lo, hi } = clique_region(&spec, 0, 2.0, CliqueShape::Auto).unwrap() else { panic!() };
        let diag: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
        assert!((diag - 2.0).abs() < 1e-12);
    }
}
