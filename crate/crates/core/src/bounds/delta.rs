//! δ-neighborhood graphs: large-n conditions and the finite-n bound.

use super::{clique_region, component_measures, size_at_least_two_from, BoundOptions, BoundReport, Precondition, BERRY_ESSEEN_C};
use crate::error::{Error, Result};
use crate::graph::WeightModel;
use crate::mixture::{HiddenLabeling, MixtureSpec, Which};
use crate::numeric::normal::std_cdf;
use crate::regions::{self, measure_with, provably_disjoint, require_exact, NumericOptions, Region};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// ν̄(B∩S), short-circuiting structural containment and disjointness.
pub(crate) fn mean_measure_inside(spec: &MixtureSpec, b: &Region, s: &Region, opts: &NumericOptions) -> Result<f64> {
    if regions::is_subset(b, s).unwrap_or(false) {
        return Ok(measure_with(spec, b, Which::Mean, opts)?.value);
    }
    if provably_disjoint(b, s)? {
        return Ok(0.0);
    }
    let both = b.clone().intersect(s.clone());
    Ok(require_exact(measure_with(spec, &both, Which::Mean, opts)?, "majority condition")?.value)
}

/// Majority and order conditions for a clique region `b` and cut `s`,
/// with `order_scale·ν̄(B)²` against the cut energy.
pub(crate) fn large_n_conditions(
    spec: &MixtureSpec,
    b: &Region,
    s: &Region,
    model: WeightModel,
    order_scale: f64,
    opts: &NumericOptions,
) -> Result<[Precondition; 2]> {
    let nu_b = measure_with(spec, b, Which::Mean, opts)?.value;
    let inside = mean_measure_inside(spec, b, s, opts)?;
    let energy = regions::cut_energy_with(spec, s, model, opts)?.value;
    Ok([Precondition::new("majority", inside, 0.5 * nu_b), Precondition::new("order", order_scale * nu_b * nu_b, energy)])
}

/// Large-n conditions for δ-neighborhood graphs:
/// `ν̄(B∩S) > ½ν̄(B)` and `(2/9)ν̄(B)² > cut energy of S`.
pub fn conditions_large_n_delta(spec: &MixtureSpec, k: usize, delta: f64, s: &Region, opts: &BoundOptions) -> Result<[Precondition; 2]> {
    let b = clique_region(spec, k, delta, opts.shape)?;
    large_n_conditions(spec, &b, s, WeightModel::DeltaNeighborhood(delta), 2.0 / 9.0, &opts.numeric)
}

/// Per-component measures of the boundary zone A, the clique region B and A∩B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMeasures {
    pub zone: Vec<f64>,
    pub clique: Vec<f64>,
    pub overlap: Vec<f64>,
}

pub fn zone_measures(spec: &MixtureSpec, a: &Region, b: &Region, opts: &NumericOptions) -> Result<ZoneMeasures> {
    let exact = |r: &Region, what: &str| -> Result<Vec<f64>> {
        (0..spec.len()).map(|k| Ok(require_exact(measure_with(spec, r, Which::Component(k), opts)?, what)?.value)).collect()
    };
    let zone = exact(a, "boundary zone")?;
    // a lower bound on ν(B) only weakens the bound
    let clique = component_measures(spec, b, opts)?;
    let overlap = if provably_disjoint(a, b)? { vec![0.0; spec.len()] } else { exact(&a.clone().intersect(b.clone()), "zone overlap")? };
    Ok(ZoneMeasures { zone, clique, overlap })
}

/// (1−ε)·n²·(2/9)·ν̄(B)².
pub fn order_floor(spec: &MixtureSpec, k: usize, delta: f64, n: u64, opts: &BoundOptions) -> Result<f64> {
    let b = clique_region(spec, k, delta, opts.shape)?;
    let nu = measure_with(spec, &b, Which::Mean, &opts.numeric)?.value;
    Ok(floor_from(nu, n, opts.epsilon))
}

pub(crate) fn floor_from(nu_b: f64, n: u64, epsilon: f64) -> f64 {
    let n = n as f64;
    (1.0 - epsilon) * n * n * (2.0 / 9.0) * nu_b * nu_b
}

/// Finite-n bound for the event that the tangle of the clique around
/// component `k` contains the vertices in `s`.
pub fn bound_small_n_delta(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    k: usize,
    delta: f64,
    s: &Region,
    opts: &BoundOptions,
) -> Result<BoundReport> {
    let b = clique_region(spec, k, delta, opts.shape)?;
    if !regions::is_subset(&b, s)? {
        return Err(Error::PreconditionFailed { condition: "clique region inside cut", slack: f64::NAN });
    }
    let a = regions::boundary_zone(s, delta)?;
    let m = zone_measures(spec, &a, &b, &opts.numeric)?;
    bound_from_measures(delta, labeling.counts(), &m, opts.epsilon)
}

/// The bound from per-component measures; the pure arithmetic core.
pub fn bound_from_measures(parameter: f64, counts: &[u64], m: &ZoneMeasures, epsilon: f64) -> Result<BoundReport> {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let avg = |v: &[f64]| counts.iter().zip(v).map(|(&c, x)| c as f64 * x).sum::<f64>() / nf;
    let (nu_a, nu_b) = (avg(&m.zone), avg(&m.clique));
    let pre = Precondition::new("clique outweighs zone", 2.0 * SQRT_2 * nu_b, 3.0 * nu_a);
    if !pre.holds {
        return Err(pre.into_error("2√2·ν̄(B) > 3·ν̄(A)"));
    }
    let gap = 3.0 * nu_a - 2.0 * SQRT_2 * nu_b;
    let range = 2.0 * SQRT_2 + 3.0;
    let hoeffding = -(-nf * 2.0 * gap * gap / (range * range)).exp_m1();

    let (mut mean, mut var, mut rho) = (0.0, 0.0, 0.0);
    for (i, &c) in counts.iter().enumerate() {
        let (za, zb, zab) = (m.zone[i], m.clique[i], m.overlap[i]);
        let atoms = [(3.0, za - zab), (-2.0 * SQRT_2, zb - zab), (3.0 - 2.0 * SQRT_2, zab), (0.0, 1.0 - za - zb + zab)];
        let e: f64 = atoms.iter().map(|(v, p)| v * p).sum();
        let v: f64 = atoms.iter().map(|(v, p)| p * (v - e).powi(2)).sum();
        let r: f64 = atoms.iter().map(|(v, p)| p * (v - e).abs().powi(3)).sum();
        let c = c as f64;
        mean += c * e;
        var += c * v;
        rho += c * r;
    }
    let berry_esseen = if var > 0.0 { std_cdf(-mean / var.sqrt()) - BERRY_ESSEEN_C * rho / var.powf(1.5) } else { f64::NEG_INFINITY };
    let correction = 1.0 - size_at_least_two_from(counts, &m.clique)?;
    Ok(BoundReport::assemble(parameter, n, vec![pre], hoeffding, berry_esseen, correction, floor_from(nu_b, n, epsilon)))
}
