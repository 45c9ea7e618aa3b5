//! Repeated sampling of the tangle-membership events, the moment identities
//! and the κ lemmas.

use crate::bounds::{moment_formulas, size_at_least_two, CutAssignment};
use crate::error::{Error, Result};
use crate::graph::WeightModel;
use crate::mixture::{sample_dataset, Dataset, HiddenLabeling, MixtureSpec};
use crate::numeric::rng::{self, derive_seed};
use crate::regions::{boundary_zone, NumericOptions, Region};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// z for a two-sided 99% interval.
pub const Z99: f64 = 2.575_829_303_548_9;

/// Largest trials·n product a single estimate may request.
pub const WORK_CAP: u64 = 100_000_000_000;

/// Flags of one simulated dataset for one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: u64,
    /// |V_B| ≥ 2.
    pub clique_nonempty: bool,
    /// |V_B ∩ V_S| > |V_B ∖ V_S|.
    pub majority: bool,
    /// κ(V_S) < (2/9)·w_{V_B}·|V_B|².
    pub order_ok: bool,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Binomial standard error √(p(1−p)/T).
    pub se: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub seed: u64,
}

impl EstimateReport {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        let t = trials as f64;
        let p = successes as f64 / t;
        let z2 = Z99 * Z99;
        let centre = (p + z2 / (2.0 * t)) / (1.0 + z2 / t);
        let half = Z99 / (1.0 + z2 / t) * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
        EstimateReport {
            trials,
            successes,
            estimate: p,
            se: (p * (1.0 - p) / t).sqrt(),
            wilson_lo: (centre - half).max(0.0),
            wilson_hi: (centre + half).min(1.0),
            seed,
        }
    }
}

fn check_work(labeling: &HiddenLabeling, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidSpec("at least one trial is required".into()));
    }
    let work = trials.saturating_mul(labeling.n() as u64);
    if work > WORK_CAP {
        return Err(Error::CapExceeded { n: work as usize, cap: WORK_CAP as usize });
    }
    Ok(())
}

fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// κ(V_S) on the graph the model induces on `data`, without materializing it.
pub fn cut_weight(data: &Dataset, inside: &[bool], model: WeightModel) -> f64 {
    match (model, data.dim()) {
        (WeightModel::DeltaNeighborhood(delta), 1) => sweep_1d(data, inside, model, delta),
        (WeightModel::DeltaNeighborhood(delta), d) if d <= 6 => cell_grid(data, inside, model, delta),
        // beyond 37.6 bandwidths the kernel weight is below 1e-300
        (WeightModel::GaussianKernel(c), 1) => sweep_1d(data, inside, model, 37.6 * c),
        _ => direct(data, inside, model),
    }
}

fn direct(data: &Dataset, inside: &[bool], model: WeightModel) -> f64 {
    let mut total = 0.0;
    for i in (0..data.n()).filter(|&i| inside[i]) {
        for j in (0..data.n()).filter(|&j| !inside[j]) {
            total += model.weight(d2(data.column(i), data.column(j)));
        }
    }
    total
}

fn sweep_1d(data: &Dataset, inside: &[bool], model: WeightModel, reach: f64) -> f64 {
    let out: Vec<f64> = {
        let mut v: Vec<f64> = (0..data.n()).filter(|&j| !inside[j]).map(|j| data.raw()[j]).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let mut total = 0.0;
    for i in (0..data.n()).filter(|&i| inside[i]) {
        let x = data.raw()[i];
        let w = |y: f64| model.weight((x - y) * (x - y));
        // (x − y)² is monotone in y on each side of x, so both windows are exact
        if let WeightModel::DeltaNeighborhood(_) = model {
            let lo = out.partition_point(|&y| y < x && w(y) == 0.0);
            let hi = out.partition_point(|&y| y <= x || w(y) > 0.0);
            total += (hi - lo) as f64;
        } else {
            let lo = out.partition_point(|&y| x - y > reach);
            let hi = out.partition_point(|&y| y - x <= reach);
            total += out[lo..hi].iter().map(|&y| w(y)).sum::<f64>();
        }
    }
    total
}

fn cell_grid(data: &Dataset, inside: &[bool], model: WeightModel, delta: f64) -> f64 {
    let d = data.dim();
    let key = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / delta).floor() as i64).collect() };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for j in (0..data.n()).filter(|&j| !inside[j]) {
        cells.entry(key(data.column(j))).or_default().push(j);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|mut code| {
            (0..d)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let mut probe = vec![0i64; d];
    for i in (0..data.n()).filter(|&i| inside[i]) {
        let x = data.column(i);
        let k = key(x);
        for off in &offsets {
            for ((p, a), b) in probe.iter_mut().zip(&k).zip(off) {
                *p = a + b;
            }
            if let Some(list) = cells.get(&probe) {
                total += list.iter().filter(|&&j| model.weight(d2(x, data.column(j))) > 0.0).count() as f64;
            }
        }
    }
    total
}

/// Smallest pairwise weight inside `members`, 0 if two of them are not adjacent.
fn min_weight(data: &Dataset, members: &[usize], model: WeightModel) -> f64 {
    let mut w = f64::INFINITY;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            w = w.min(model.weight(d2(data.column(i), data.column(j))));
        }
    }
    if w.is_finite() {
        w
    } else {
        1.0
    }
}

/// κ ≤ ¼|V_A|² for δ-graphs, with A the boundary zone of S.
fn check_zone_lemma(data: &Dataset, zone: &Region, kappa: f64) -> Result<()> {
    let in_zone = data.columns().filter(|x| zone.contains_unchecked(x)).count() as f64;
    if kappa > 0.25 * in_zone * in_zone {
        return Err(Error::InvariantViolated(format!("κ = {kappa} exceeds |V_A|²/4 = {}", 0.25 * in_zone * in_zone)));
    }
    Ok(())
}

/// κ(V_{(−∞,c]}) ≤ ¼(Σ_i e^{−(x_i−c)²/2σ²})² for 1D kernel graphs.
fn check_complete_lemma(data: &Dataset, c: f64, bandwidth: f64, kappa: f64) -> Result<()> {
    let s: f64 = data.raw().iter().map(|x| (-(x - c) * (x - c) / (2.0 * bandwidth * bandwidth)).exp()).sum();
    let cap = 0.25 * s * s;
    if kappa > cap * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::InvariantViolated(format!("κ = {kappa} exceeds the kernel cap {cap}")));
    }
    Ok(())
}

/// Cut point of a one-dimensional threshold cut, if `s` is one.
fn threshold_point(s: &Region) -> Option<f64> {
    match s {
        Region::Halfspace { normal, offset } if normal.len() == 1 && offset.is_finite() => Some(offset / normal[0]),
        Region::Complement(inner) => threshold_point(inner),
        _ => None,
    }
}

/// Per-event geometry evaluated on one dataset.
struct EventEval {
    clique_nonempty: bool,
    majority: bool,
    order_ok: bool,
}

fn evaluate_event(data: &Dataset, model: WeightModel, clique: &[usize], cut: &Region, zone: Option<&Region>) -> Result<EventEval> {
    let inside: Vec<bool> = data.columns().map(|x| cut.contains_unchecked(x)).collect();
    let kappa = cut_weight(data, &inside, model);
    match model {
        WeightModel::DeltaNeighborhood(_) => {
            if let Some(z) = zone {
                check_zone_lemma(data, z, kappa)?;
            }
        }
        WeightModel::GaussianKernel(c) => {
            if data.dim() == 1 {
                if let Some(t) = threshold_point(cut) {
                    check_complete_lemma(data, t, c, kappa)?;
                }
            }
        }
    }
    let in_s = clique.iter().filter(|&&i| inside[i]).count();
    let size = clique.len();
    let w = min_weight(data, clique, model);
    Ok(EventEval { clique_nonempty: size >= 2, majority: in_s > size - in_s, order_ok: kappa < 2.0 / 9.0 * w * (size * size) as f64 })
}

fn zone_for(cut: &Region, model: WeightModel) -> Option<Region> {
    match model {
        WeightModel::DeltaNeighborhood(delta) => boundary_zone(cut, delta).ok(),
        WeightModel::GaussianKernel(_) => None,
    }
}

/// Per-trial outcomes for "the tangle of the clique in `clique` contains V_S".
pub fn simulate_event(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    model: WeightModel,
    clique: &Region,
    cut: &Region,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    check_work(labeling, trials)?;
    model.validate()?;
    clique.validate(spec.dimension())?;
    cut.validate(spec.dimension())?;
    let zone = zone_for(cut, model);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let data = sample_dataset(spec, labeling, derive_seed(seed, t))?;
            let members: Vec<usize> = data.columns().enumerate().filter(|(_, x)| clique.contains_unchecked(x)).map(|(i, _)| i).collect();
            let e = evaluate_event(&data, model, &members, cut, zone.as_ref())?;
            Ok(TrialOutcome {
                index: t,
                clique_nonempty: e.clique_nonempty,
                majority: e.majority,
                order_ok: e.order_ok,
                success: e.clique_nonempty && e.majority && e.order_ok,
            })
        })
        .collect()
}

pub fn estimate_event_probability(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    model: WeightModel,
    clique: &Region,
    cut: &Region,
    trials: u64,
    seed: u64,
) -> Result<EstimateReport> {
    let outcomes = simulate_event(spec, labeling, model, clique, cut, trials, seed)?;
    Ok(EstimateReport::from_counts(outcomes.iter().filter(|o| o.success).count() as u64, trials, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncomparabilityEstimate {
    pub overall: EstimateReport,
    /// `(clique, other, estimate)` per ordered event, from the same datasets.
    pub events: Vec<(usize, usize, EstimateReport)>,
}

/// Frequency of "every clique tangle is nonempty and, for every pair, each
/// tangle contains its side of the shared cut".
pub fn estimate_incomparability(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    model: WeightModel,
    cliques: &[Region],
    cuts: &CutAssignment,
    trials: u64,
    seed: u64,
) -> Result<IncomparabilityEstimate> {
    check_work(labeling, trials)?;
    model.validate()?;
    if cliques.len() != spec.len() || cuts.components() != spec.len() {
        return Err(Error::InvalidSpec(format!(
            "{} clique regions and a cut family over {} components for a {}-component mixture",
            cliques.len(),
            cuts.components(),
            spec.len()
        )));
    }
    let events = cuts.events();
    let regions: Vec<(Region, Option<Region>)> = events
        .iter()
        .map(|&(a, b)| {
            let s = cuts.cut(a, b)?;
            let z = zone_for(&s, model);
            Ok((s, z))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<(bool, Vec<bool>)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, Vec<bool>)> {
            let data = sample_dataset(spec, labeling, derive_seed(seed, t))?;
            let members: Vec<Vec<usize>> = cliques
                .iter()
                .map(|c| data.columns().enumerate().filter(|(_, x)| c.contains_unchecked(x)).map(|(i, _)| i).collect())
                .collect();
            let all_nonempty = members.iter().all(|m| m.len() >= 2);
            let mut flags = Vec::with_capacity(events.len());
            for (&(a, _), (s, z)) in events.iter().zip(&regions) {
                let e = evaluate_event(&data, model, &members[a], s, z.as_ref())?;
                flags.push(e.clique_nonempty && e.majority && e.order_ok);
            }
            Ok((all_nonempty && flags.iter().all(|&f| f), flags))
        })
        .collect::<Result<_>>()?;
    let overall = EstimateReport::from_counts(rows.iter().filter(|r| r.0).count() as u64, trials, seed);
    let per_event = events
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| (a, b, EstimateReport::from_counts(rows.iter().filter(|r| r.1[e]).count() as u64, trials, seed)))
        .collect();
    Ok(IncomparabilityEstimate { overall, events: per_event })
}

/// One closed-form quantity next to its empirical counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub quantity: String,
    pub empirical: f64,
    pub formula: f64,
    /// Standard error of the empirical value.
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsCheck {
    pub n: usize,
    pub trials: u64,
    pub rows: Vec<MomentRow>,
    /// Empirical Var(|V_A|²).
    pub var_size_squared: f64,
    /// Empirical Var(κ(V_S)).
    pub var_kappa: f64,
}

impl MomentsCheck {
    pub fn row(&self, quantity: &str) -> Option<&MomentRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }
}

fn row(quantity: &str, empirical: f64, formula: f64, se: f64) -> MomentRow {
    let z = if se > 0.0 {
        (empirical - formula) / se
    } else if (empirical - formula).abs() <= 1e-9 * formula.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    };
    MomentRow { quantity: quantity.to_string(), empirical, formula, se, z }
}

/// Sample mean and central moments 2 and 4.
fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let t = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / t;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / t;
    (mean, m2, m4)
}

/// Empirical |V_A|, |V_A|², P(|V_A| ≥ 2) and κ(V_S) against the closed forms.
#[allow(clippy::too_many_arguments)]
pub fn empirical_moments_check(
    spec: &MixtureSpec,
    labeling: &HiddenLabeling,
    region: &Region,
    cut: &Region,
    model: WeightModel,
    trials: u64,
    seed: u64,
    numeric: &NumericOptions,
) -> Result<MomentsCheck> {
    check_work(labeling, trials)?;
    if trials < 2 {
        return Err(Error::InvalidSpec("moment checks need at least two trials".into()));
    }
    region.validate(spec.dimension())?;
    cut.validate(spec.dimension())?;
    let samples: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let data = sample_dataset(spec, labeling, derive_seed(seed, t))?;
            let size = data.columns().filter(|x| region.contains_unchecked(x)).count() as f64;
            let inside: Vec<bool> = data.columns().map(|x| cut.contains_unchecked(x)).collect();
            Ok((size, cut_weight(&data, &inside, model)))
        })
        .collect::<Result<_>>()?;
    let formulas = moment_formulas(spec, labeling, region, model, cut, numeric)?;
    // undefined when a component lies entirely inside the region
    let pair = match size_at_least_two(spec, labeling, region, numeric) {
        Ok(p) => Some(p),
        Err(Error::InvalidSpec(_)) => None,
        Err(e) => return Err(e),
    };
    let t = trials as f64;
    let sizes: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let squares: Vec<f64> = sizes.iter().map(|s| s * s).collect();
    let kappas: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let (mean, var, m4) = moments(&sizes);
    let (sq_mean, sq_var, _) = moments(&squares);
    let (k_mean, k_var, _) = moments(&kappas);
    let unbiased = var * t / (t - 1.0);
    let p = sizes.iter().filter(|&&s| s >= 2.0).count() as f64 / t;
    let mut rows = vec![
        row("mean_size", mean, formulas.mean, (var / t).sqrt()),
        row("var_size", unbiased, formulas.variance, ((m4 - var * var).max(0.0) / t).sqrt()),
        row("second_moment", sq_mean, formulas.second_moment, (sq_var / t).sqrt()),
        row("kappa_mean", k_mean, formulas.kappa_mean, (k_var / t).sqrt()),
    ];
    if let Some(pair) = pair {
        rows.push(row("pair_probability", p, pair, (pair * (1.0 - pair) / t).sqrt()));
    }
    Ok(MomentsCheck { n: labeling.n(), trials, rows, var_size_squared: sq_var, var_kappa: k_var })
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Tally of [`kappa_lemma_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KappaSweepReport {
    pub instances: u64,
    pub zone_violations: u64,
    pub kernel_violations: u64,
}

/// Random (dataset, cut) instances checking both κ lemmas against κ summed
/// pair by pair: δ-graphs in dimensions 1–3 with halfspace, ball and box
/// cuts, and 1D kernel graphs with threshold cuts.
pub fn kappa_lemma_sweep(instances: u64, seed: u64) -> Result<KappaSweepReport> {
    let counts: Vec<(u64, u64)> = (0..instances)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let mut r = rng::stream(derive_seed(seed, t), 0);
            let d = rng::uniform_index(&mut r, 1, 3);
            let n = rng::uniform_index(&mut r, 2, 60);
            let spread = 0.5 + 3.0 * rng::uniform_open(&mut r);
            let pts: Vec<f64> = (0..n * d).map(|_| spread * rng::std_normal(&mut r)).collect();
            let data = Dataset::from_columns(d, pts, t)?;
            let delta = 0.05 + 2.0 * rng::uniform_open(&mut r);
            let centre: Vec<f64> = (0..d).map(|_| rng::std_normal(&mut r)).collect();
            let cut = match rng::uniform_index(&mut r, 0, 2) {
                0 => {
                    let normal: Vec<f64> = (0..d).map(|_| rng::std_normal(&mut r)).collect();
                    Region::halfspace(normal, rng::std_normal(&mut r))?
                }
                1 if d > 1 => Region::Ball { center: centre, radius: 0.2 + 2.0 * rng::uniform_open(&mut r) },
                _ => Region::cube(&centre, 0.2 + 2.0 * rng::uniform_open(&mut r)),
            };
            let model = WeightModel::DeltaNeighborhood(delta);
            let inside: Vec<bool> = data.columns().map(|x| cut.contains_unchecked(x)).collect();
            let kappa = direct(&data, &inside, model);
            let zone = boundary_zone(&cut, delta)?;
            let zone_bad = check_zone_lemma(&data, &zone, kappa).is_err() as u64;

            let line: Vec<f64> = (0..n).map(|_| spread * rng::std_normal(&mut r)).collect();
            let line = Dataset::from_columns(1, line, t)?;
            let c = rng::std_normal(&mut r);
            let bandwidth = 0.2 + 2.0 * rng::uniform_open(&mut r);
            let kernel = WeightModel::GaussianKernel(bandwidth);
            let below: Vec<bool> = line.raw().iter().map(|&x| x <= c).collect();
            let kappa = direct(&line, &below, kernel);
            let kernel_bad = check_complete_lemma(&line, c, bandwidth, kappa).is_err() as u64;
            Ok((zone_bad, kernel_bad))
        })
        .collect::<Result<_>>()?;
    Ok(KappaSweepReport {
        instances,
        zone_violations: counts.iter().map(|c| c.0).sum(),
        kernel_violations: counts.iter().map(|c| c.1).sum(),
    })
}
