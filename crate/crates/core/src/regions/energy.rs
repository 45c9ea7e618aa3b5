//! Cut energy ∫_S ∫_S̄ w(x, y) f̄(x) f̄(y) dy dx.

use super::measure::{MeasureResult, Method, NumericOptions};
use super::{dot, Region};
use crate::error::{Error, Result};
use crate::graph::WeightModel;
use crate::mixture::{Component, MixtureSpec};
use crate::numeric::normal::{interval_mass, pdf, std_inv_cdf, std_sf};
use crate::numeric::qmc::{randomized_mean, REPLICATES};
use crate::numeric::quad::{integrate, integrate_pieces};
use crate::numeric::rng::derive_seed;
use statrs::function::gamma::gamma_lr;
use std::f64::consts::PI;

/// Tail reach of the Gaussian integrands, in standard deviations.
const REACH: f64 = 12.0;

/// Weight of the ordered component pair (x from k, y from l).
type Pairs = Vec<(usize, usize, f64)>;

/// Cut energy of `s` under the mean density, default options.
pub fn cut_energy(spec: &MixtureSpec, s: &Region, model: WeightModel) -> Result<MeasureResult> {
    cut_energy_with(spec, s, model, &NumericOptions::default())
}

pub fn cut_energy_with(spec: &MixtureSpec, s: &Region, model: WeightModel, opts: &NumericOptions) -> Result<MeasureResult> {
    let r = spec.ratios();
    let pairs = (0..spec.len()).flat_map(|k| (0..spec.len()).map(move |l| (k, l))).map(|(k, l)| (k, l, r[k] * r[l])).collect();
    pair_energy(spec, s, model, pairs, opts)
}

/// Σ_k r_k ∫_S ∫_S̄ w f_k f_k, the same-label part of the cut energy.
pub fn self_energy_with(spec: &MixtureSpec, s: &Region, model: WeightModel, opts: &NumericOptions) -> Result<MeasureResult> {
    let pairs = spec.ratios().into_iter().enumerate().map(|(k, r)| (k, k, r)).collect();
    pair_energy(spec, s, model, pairs, opts)
}

fn pair_energy(spec: &MixtureSpec, s: &Region, model: WeightModel, pairs: Pairs, opts: &NumericOptions) -> Result<MeasureResult> {
    model.validate()?;
    s.validate(spec.dimension())?;
    let comps = spec.components();
    if spec.dimension() == 1 {
        if let Some(inside) = intervals_1d(s) {
            return line_energy(comps, &inside, model, &pairs, opts.tolerance);
        }
    }
    if let Some((u, c)) = as_halfspace(s) {
        if let Some(r) = projected_energy(comps, &u, c, model, &pairs, opts.tolerance)? {
            return Ok(r);
        }
    }
    Ok(sampled_energy(spec, s, model, &pairs, opts))
}

fn as_halfspace(s: &Region) -> Option<(Vec<f64>, f64)> {
    match s {
        Region::Halfspace { normal, offset } if offset.is_finite() => Some((normal.clone(), *offset)),
        // energy is symmetric in S and S̄; the closure of the complement is a halfspace
        Region::Complement(inner) => match inner.as_ref() {
            Region::Halfspace { normal, offset } if offset.is_finite() => Some((normal.iter().map(|v| -v).collect(), -offset)),
            _ => None,
        },
        _ => None,
    }
}

/// Sorted disjoint closed intervals whose union is the region (up to endpoints).
pub(crate) fn intervals_1d(r: &Region) -> Option<Vec<(f64, f64)>> {
    let out = match r {
        Region::Halfspace { normal, offset } => {
            if normal[0] > 0.0 {
                vec![(f64::NEG_INFINITY, offset / normal[0])]
            } else {
                vec![(offset / normal[0], f64::INFINITY)]
            }
        }
        Region::Interval { lo, hi } => vec![(*lo, *hi)],
        Region::Ball { center, radius } => vec![(center[0] - radius, center[0] + radius)],
        Region::Box { lo, hi } => vec![(lo[0], hi[0])],
        Region::Voronoi { site, sites } => {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (u, c) in super::bisectors(*site, sites) {
                if u[0] > 0.0 {
                    hi = hi.min(c / u[0]);
                } else {
                    lo = lo.max(c / u[0]);
                }
            }
            vec![(lo, hi)]
        }
        Region::Complement(inner) => complement_1d(&intervals_1d(inner)?),
        Region::Intersection(a, b) => {
            let a = intervals_1d(a)?;
            let b = intervals_1d(b)?;
            let mut out = Vec::new();
            for &(p, q) in &a {
                for &(s, t) in &b {
                    out.push((p.max(s), q.min(t)));
                }
            }
            out
        }
        Region::Zone { base, delta } => {
            let s = intervals_1d(base)?;
            let grow = |v: &[(f64, f64)]| v.iter().map(|(a, b)| (a - delta, b + delta)).collect::<Vec<_>>();
            let a = normalize(grow(&s));
            let b = normalize(grow(&complement_1d(&s)));
            let mut out = Vec::new();
            for &(p, q) in &a {
                for &(s, t) in &b {
                    out.push((p.max(s), q.min(t)));
                }
            }
            out
        }
    };
    Some(normalize(out))
}

fn normalize(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.retain(|(a, b)| a < b);
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn complement_1d(v: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let v = normalize(v.to_vec());
    let mut out = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for (a, b) in v {
        out.push((start, a));
        start = b;
    }
    out.push((start, f64::INFINITY));
    normalize(out)
}

fn total_reach(comps: &[Component]) -> (f64, f64) {
    let lo = comps.iter().map(|c| c.mean[0] - REACH * c.stddev).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|c| c.mean[0] + REACH * c.stddev).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// ∫ over an interval of exp(−(x−y)²/2c²) φ(y | μ, σ²) dy, in closed form.
fn kernel_interval(x: f64, bandwidth: f64, mean: f64, sd: f64, a: f64, b: f64) -> f64 {
    let v = bandwidth * bandwidth + sd * sd;
    let m = (x * sd * sd + mean * bandwidth * bandwidth) / v;
    let s = bandwidth * sd / v.sqrt();
    bandwidth * (2.0 * PI).sqrt() * pdf(x, mean, v.sqrt()) * interval_mass(a, b, m, s)
}

fn line_energy(comps: &[Component], inside: &[(f64, f64)], model: WeightModel, pairs: &Pairs, tol: f64) -> Result<MeasureResult> {
    let outside = complement_1d(inside);
    let (reach_lo, reach_hi) = total_reach(comps);
    let inner = |x: f64, l: usize| -> f64 {
        let c = &comps[l];
        match model {
            WeightModel::DeltaNeighborhood(d) => {
                outside.iter().map(|&(a, b)| interval_mass(a.max(x - d), b.min(x + d), c.mean[0], c.stddev)).sum()
            }
            WeightModel::GaussianKernel(bw) => outside.iter().map(|&(a, b)| kernel_interval(x, bw, c.mean[0], c.stddev, a, b)).sum(),
        }
    };
    // outer integration range: S, cut down to where the integrand can be nonzero
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let mut breaks = Vec::new();
    for &(a, b) in inside {
        match model {
            WeightModel::DeltaNeighborhood(d) => {
                for &(p, q) in &outside {
                    pieces.push((a.max(p - d), b.min(q + d)));
                    breaks.extend([p - d, p + d, q - d, q + d]);
                }
            }
            WeightModel::GaussianKernel(_) => pieces.push((a.max(reach_lo), b.min(reach_hi))),
        }
    }
    breaks.extend(comps.iter().map(|c| c.mean[0]));
    breaks.retain(|x| x.is_finite());
    let pieces = normalize(pieces.into_iter().map(|(a, b)| (a.max(reach_lo), b.min(reach_hi))).collect());
    let mut value = 0.0;
    let mut error = 0.0;
    let share = tol / pieces.len().max(1) as f64;
    for (a, b) in pieces {
        let q = integrate_pieces(
            |x| Ok(pairs.iter().map(|&(k, l, w)| w * pdf(x, comps[k].mean[0], comps[k].stddev) * inner(x, l)).sum()),
            a,
            b,
            &breaks,
            share,
        )?;
        value += q.value;
        error += q.error;
    }
    Ok(MeasureResult { value: value.max(0.0), method: Method::Quadrature, error, lower_bound: false })
}

/// Halfspace cut in any dimension: integrate along the normal, with the
/// orthogonal part of the kernel averaged in closed form.
fn projected_energy(
    comps: &[Component],
    u: &[f64],
    cut: f64,
    model: WeightModel,
    pairs: &Pairs,
    tol: f64,
) -> Result<Option<MeasureResult>> {
    let d = u.len();
    let rest = (d - 1) as f64;
    // per pair: along-normal means and the orthogonal mean offset length
    let mut terms = Vec::with_capacity(pairs.len());
    for &(k, l, w) in pairs {
        let (ck, cl) = (&comps[k], &comps[l]);
        let diff: Vec<f64> = ck.mean.iter().zip(&cl.mean).map(|(a, b)| a - b).collect();
        let along = dot(&diff, u);
        let orth2 = (dot(&diff, &diff) - along * along).max(0.0);
        let v = ck.stddev * ck.stddev + cl.stddev * cl.stddev;
        terms.push((w, dot(&ck.mean, u), ck.stddev, dot(&cl.mean, u), cl.stddev, orth2.sqrt(), v));
    }
    let mut value = 0.0;
    let mut error = 0.0;
    let share = tol / terms.len().max(1) as f64;
    match model {
        WeightModel::DeltaNeighborhood(delta) => {
            // chance that the orthogonal gap stays within sqrt(δ² − (s−t)²)
            let orth = |gap2: f64, m: f64, v: f64| -> Option<f64> {
                if gap2 <= 0.0 {
                    return Some(0.0);
                }
                if d == 1 {
                    Some(1.0)
                } else if d == 2 {
                    let r = gap2.sqrt();
                    Some(interval_mass(-r, r, m, v.sqrt()))
                } else if m < 1e-12 {
                    Some(gamma_lr(rest / 2.0, gap2 / (2.0 * v)))
                } else {
                    None
                }
            };
            if d > 2 && terms.iter().any(|t| t.5 >= 1e-12) {
                return Ok(None);
            }
            for &(w, ak, sk, al, sl, m, v) in &terms {
                let mut inner_err: f64 = 0.0;
                let q = integrate(
                    |t| {
                        let q = integrate(
                            |s| Ok(pdf(s, al, sl) * orth(delta * delta - (s - t) * (s - t), m, v).unwrap_or(0.0)),
                            cut,
                            t + delta,
                            0.1 * share,
                        )?;
                        inner_err = inner_err.max(q.error);
                        Ok(pdf(t, ak, sk) * q.value)
                    },
                    cut - delta,
                    cut,
                    0.5 * share,
                )?;
                value += w * q.value;
                error += w * (q.error + inner_err * delta);
            }
        }
        WeightModel::GaussianKernel(bw) => {
            for &(w, ak, sk, al, sl, m, v) in &terms {
                let damp = (1.0 + v / (bw * bw)).powf(-rest / 2.0) * (-(m * m) / (2.0 * (bw * bw + v))).exp();
                if damp == 0.0 {
                    continue;
                }
                let lo = (ak - REACH * sk).min(cut);
                let vv = bw * bw + sl * sl;
                let s_post = bw * sl / vv.sqrt();
                let q = integrate_pieces(
                    |t| {
                        let mpost = (t * sl * sl + al * bw * bw) / vv;
                        Ok(pdf(t, ak, sk) * bw * (2.0 * PI).sqrt() * pdf(t, al, vv.sqrt()) * std_sf((cut - mpost) / s_post))
                    },
                    lo,
                    cut,
                    &[ak, al],
                    share / damp.max(1e-300),
                )?;
                value += w * damp * q.value;
                error += w * damp * q.error;
            }
        }
    }
    Ok(Some(MeasureResult { value: value.max(0.0), method: Method::Quadrature, error, lower_bound: false }))
}

fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    PI.powf(half) / statrs::function::gamma::gamma(half + 1.0)
}

/// Randomized QMC: draw x from each f_k, then a partner y from the kernel
/// around x, and average w-weighted densities of y on the far side.
fn sampled_energy(spec: &MixtureSpec, s: &Region, model: WeightModel, pairs: &Pairs, opts: &NumericOptions) -> MeasureResult {
    let d = spec.dimension();
    let comps = spec.components();
    let (offset_dims, scale) = match model {
        WeightModel::DeltaNeighborhood(delta) => (if d == 2 { 2 } else { d + 1 }, unit_ball_volume(d) * delta.powi(d as i32)),
        WeightModel::GaussianKernel(bw) => (d, (2.0 * PI * bw * bw).powf(d as f64 / 2.0)),
    };
    let mut value = 0.0;
    let mut var = 0.0;
    for (k, comp) in comps.iter().enumerate() {
        let partners: Vec<(usize, f64)> = pairs.iter().filter(|p| p.0 == k).map(|p| (p.1, p.2)).collect();
        if partners.is_empty() {
            continue;
        }
        let e = randomized_mean(d + offset_dims, opts.qmc_points, REPLICATES, derive_seed(opts.seed ^ 0xe4e7, k as u64), |p| {
            let (px, py) = p.split_at(d);
            let x: Vec<f64> = px.iter().zip(&comp.mean).map(|(u, m)| m + comp.stddev * std_inv_cdf(*u)).collect();
            if !s.contains_unchecked(&x) {
                return 0.0;
            }
            let mut y = x.clone();
            match model {
                WeightModel::DeltaNeighborhood(delta) => {
                    if d == 2 {
                        let r = delta * py[0].sqrt();
                        let th = 2.0 * PI * py[1];
                        y[0] += r * th.cos();
                        y[1] += r * th.sin();
                    } else {
                        let z: Vec<f64> = py[..d].iter().map(|u| std_inv_cdf(*u)).collect();
                        let n = dot(&z, &z).sqrt();
                        let r = delta * py[d].powf(1.0 / d as f64);
                        for (yi, zi) in y.iter_mut().zip(&z) {
                            *yi += r * zi / n;
                        }
                    }
                }
                WeightModel::GaussianKernel(bw) => {
                    for (yi, u) in y.iter_mut().zip(py) {
                        *yi += bw * std_inv_cdf(*u);
                    }
                }
            }
            if s.contains_unchecked(&y) {
                return 0.0;
            }
            scale
                * partners
                    .iter()
                    .map(|&(l, w)| {
                        let c = &comps[l];
                        w * y.iter().zip(&c.mean).map(|(yi, m)| pdf(*yi, *m, c.stddev)).product::<f64>()
                    })
                    .sum::<f64>()
        });
        value += e.value;
        var += e.error * e.error;
    }
    MeasureResult { value: value.max(0.0), method: Method::QuasiMonteCarlo, error: var.sqrt(), lower_bound: false }
}

impl WeightModel {
    pub(crate) fn validate(&self) -> Result<()> {
        let p = match self {
            WeightModel::DeltaNeighborhood(d) => *d,
            WeightModel::GaussianKernel(c) => *c,
        };
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidSpec(format!("weight parameter {p} must be positive")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::Ratio;

    fn base(d: usize, lambda: f64) -> MixtureSpec {
        MixtureSpec::two_gaussians(d, Ratio::new(1, 2).unwrap(), lambda, 1.0).unwrap()
    }

    fn quick() -> NumericOptions {
        NumericOptions { qmc_points: 1 << 18, ..Default::default() }
    }

    #[test]
    fn interval_algebra() {
        let s = Region::Interval { lo: 0.0, hi: 1.0 }.complement().intersect(Region::halfspace(vec![1.0], 5.0).unwrap());
        assert_eq!(intervals_1d(&s).unwrap(), vec![(f64::NEG_INFINITY, 0.0), (1.0, 5.0)]);
    }

    #[test]
    fn symmetric_under_complement() {
        let spec = base(1, 4.0);
        let s = Region::halfspace(vec![1.0], 1.7).unwrap();
        for model in [WeightModel::DeltaNeighborhood(0.8), WeightModel::GaussianKernel(1.0)] {
            let a = cut_energy(&spec, &s, model).unwrap();
            let b = cut_energy(&spec, &s.clone().complement(), model).unwrap();
            assert!((a.value - b.value).abs() < 1e-10, "{a:?} {b:?}");
        }
    }

    #[test]
    fn vanishing_range() {
        let spec = base(1, 4.0);
        let s = Region::halfspace(vec![1.0], 2.0).unwrap();
        let mut last = f64::INFINITY;
        for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
            let e = cut_energy(&spec, &s, WeightModel::DeltaNeighborhood(delta)).unwrap().value;
            assert!(e < last);
            last = e;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn planar_halfspace_matches_sampling() {
        let spec = base(2, 3.0);
        let s = Region::axis_halfspace(2, 0, 1.5);
        for model in [WeightModel::DeltaNeighborhood(1.0), WeightModel::GaussianKernel(1.0)] {
            let exact = cut_energy(&spec, &s, model).unwrap();
            assert_eq!(exact.method, Method::Quadrature);
            let boxed = Region::Box { lo: vec![f64::NEG_INFINITY; 2], hi: vec![1.5, f64::INFINITY] };
            let mc = cut_energy_with(&spec, &boxed, model, &quick()).unwrap();
            assert_eq!(mc.method, Method::QuasiMonteCarlo);
            assert!((exact.value - mc.value).abs() < 5.0 * mc.error, "{model:?}: {exact:?} vs {mc:?}");
        }
    }

    #[test]
    fn three_dim_halfspace_matches_sampling() {
        let spec = base(3, 3.0);
        let s = Region::halfspace(vec![1.0, 0.0, 0.0], 1.2).unwrap();
        let exact = cut_energy(&spec, &s, WeightModel::DeltaNeighborhood(1.1)).unwrap();
        let boxed = Region::Box { lo: vec![f64::NEG_INFINITY; 3], hi: vec![1.2, f64::INFINITY, f64::INFINITY] };
        let mc = cut_energy_with(&spec, &boxed, WeightModel::DeltaNeighborhood(1.1), &quick()).unwrap();
        assert!((exact.value - mc.value).abs() < 5.0 * mc.error, "{exact:?} vs {mc:?}");
    }

    #[test]
    fn self_part_is_smaller() {
        let spec = base(1, 3.0);
        let s = Region::halfspace(vec![1.0], 1.5).unwrap();
        let m = WeightModel::DeltaNeighborhood(1.0);
        let all = cut_energy(&spec, &s, m).unwrap().value;
        let own = self_energy_with(&spec, &s, m, &NumericOptions::default()).unwrap().value;
        assert!(own > 0.0 && own < 2.0 * all);
    }
}
