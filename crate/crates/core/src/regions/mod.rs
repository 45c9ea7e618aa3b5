//! Symbolic regions of ℝ^d: membership, distances, boundary zones, Gaussian
//! measures and cut energies.

mod convex;
mod energy;
mod measure;

pub use energy::{cut_energy, cut_energy_with, self_energy_with};
pub(crate) use measure::require_exact;
pub use measure::{measure, measure_with, provably_disjoint, MeasureResult, Method, NumericOptions};

use crate::error::{Error, Result};
use crate::mixture::MixtureSpec;
use serde::{Deserialize, Serialize};

/// A closed subset of ℝ^d built from primitive shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `{x : x·normal ≤ offset}`; infinite offsets give ℝ^d or ∅.
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `[lo, hi]` on the real line.
    Interval {
        lo: f64,
        hi: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Points at least as close to `sites[site]` as to every other site.
    Voronoi {
        site: usize,
        sites: Vec<Vec<f64>>,
    },
    Complement(Box<Region>),
    Intersection(Box<Region>, Box<Region>),
    /// Predicate form of a boundary zone: `dist(x, base) ≤ delta` and
    /// `dist(x, complement of base) ≤ delta`, with distances that may be
    /// lower bounds (so the set is a superset of the true zone).
    Zone {
        base: Box<Region>,
        delta: f64,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

impl Region {
    /// Halfspace `{x : x·normal ≤ offset}`; the normal is rescaled to unit length.
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Region> {
        let norm = dot(&normal, &normal).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidRegion("halfspace normal must be nonzero".into()));
        }
        Ok(Region::Halfspace { normal: normal.iter().map(|u| u / norm).collect(), offset: offset / norm })
    }

    /// `{x : x_axis ≤ offset}`.
    pub fn axis_halfspace(dim: usize, axis: usize, offset: f64) -> Region {
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Region::Halfspace { normal, offset }
    }

    /// All of ℝ^d.
    pub fn whole(dim: usize) -> Region {
        Region::axis_halfspace(dim, 0, f64::INFINITY)
    }

    pub fn empty(dim: usize) -> Region {
        Region::axis_halfspace(dim, 0, f64::NEG_INFINITY)
    }

    pub fn complement(self) -> Region {
        match self {
            Region::Complement(inner) => *inner,
            other => Region::Complement(Box::new(other)),
        }
    }

    pub fn intersect(self, other: Region) -> Region {
        Region::Intersection(Box::new(self), Box::new(other))
    }

    /// Axis-aligned cube of the given half-width around `center`.
    pub fn cube(center: &[f64], half_width: f64) -> Region {
        Region::Box { lo: center.iter().map(|c| c - half_width).collect(), hi: center.iter().map(|c| c + half_width).collect() }
    }

    /// Dimension fixed by the region, if any primitive pins it down.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Region::Halfspace { normal, .. } => Some(normal.len()),
            Region::Interval { .. } => Some(1),
            Region::Ball { center, .. } => Some(center.len()),
            Region::Box { lo, .. } => Some(lo.len()),
            Region::Voronoi { sites, .. } => sites.first().map(Vec::len),
            Region::Complement(r) => r.dim(),
            Region::Intersection(a, b) => a.dim().or_else(|| b.dim()),
            Region::Zone { base, .. } => base.dim(),
        }
    }

    /// Checks the shape invariants in dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRegion(m));
        match self {
            Region::Halfspace { normal, offset } => {
                check_dim(d, normal.len())?;
                if (dot(normal, normal).sqrt() - 1.0).abs() > 1e-12 {
                    return bad("halfspace normal must have unit length".into());
                }
                if offset.is_nan() {
                    return bad("halfspace offset is NaN".into());
                }
            }
            Region::Interval { lo, hi } => {
                check_dim(d, 1)?;
                if !(lo <= hi) {
                    return bad(format!("interval [{lo}, {hi}] is reversed"));
                }
            }
            Region::Ball { center, radius } => {
                check_dim(d, center.len())?;
                if !(*radius >= 0.0) {
                    return bad(format!("ball radius {radius} is negative"));
                }
            }
            Region::Box { lo, hi } => {
                check_dim(d, lo.len())?;
                check_dim(d, hi.len())?;
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
                    return bad("box bounds are reversed".into());
                }
            }
            Region::Voronoi { site, sites } => {
                if *site >= sites.len() {
                    return bad(format!("site index {site} out of range for {} sites", sites.len()));
                }
                for s in sites {
                    check_dim(d, s.len())?;
                }
            }
            Region::Complement(r) => r.validate(d)?,
            Region::Intersection(a, b) => {
                a.validate(d)?;
                b.validate(d)?;
            }
            Region::Zone { base, delta } => {
                if !(*delta > 0.0) {
                    return bad("zone width must be positive".into());
                }
                base.validate(d)?;
            }
        }
        Ok(())
    }

    /// Membership; every primitive is closed on its defining inequality.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        match self {
            Region::Halfspace { normal, offset } => dot(normal, x) <= *offset,
            Region::Interval { lo, hi } => *lo <= x[0] && x[0] <= *hi,
            Region::Ball { center, radius } => dist2(center, x) <= radius * radius,
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| a <= v && v <= b),
            Region::Voronoi { site, sites } => {
                let own = dist2(&sites[*site], x);
                sites.iter().all(|s| own <= dist2(s, x))
            }
            Region::Complement(r) => !r.contains_unchecked(x),
            Region::Intersection(a, b) => a.contains_unchecked(x) && b.contains_unchecked(x),
            Region::Zone { base, delta } => {
                // both distances exist for every shape a zone can be built on
                base.dist_to(x).is_ok_and(|v| v <= *delta) && base.dist_to_complement(x).is_ok_and(|v| v <= *delta)
            }
        }
    }

    /// Euclidean distance from `x` to the region, or a lower bound on it
    /// (Voronoi cells and intersections).
    pub fn dist_to(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Region::Halfspace { normal, offset } => (dot(normal, x) - offset).max(0.0),
            Region::Interval { lo, hi } => (lo - x[0]).max(x[0] - hi).max(0.0),
            Region::Ball { center, radius } => (dist2(center, x).sqrt() - radius).max(0.0),
            Region::Box { lo, hi } => {
                x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| (a - v).max(v - b).max(0.0).powi(2)).sum::<f64>().sqrt()
            }
            Region::Voronoi { site, sites } => bisectors(*site, sites).map(|(u, c)| (dot(&u, x) - c).max(0.0)).fold(0.0, f64::max),
            Region::Complement(r) => r.dist_to_complement(x)?,
            Region::Intersection(a, b) => a.dist_to(x)?.max(b.dist_to(x)?),
            Region::Zone { .. } => return Err(Error::UnsupportedSetting("distance to a predicate zone".into())),
        })
    }

    /// Distance from `x` to the closure of the complement, or a lower bound on it.
    pub fn dist_to_complement(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Region::Halfspace { normal, offset } => (offset - dot(normal, x)).max(0.0),
            Region::Interval { lo, hi } => (x[0] - lo).min(hi - x[0]).max(0.0),
            Region::Ball { center, radius } => (radius - dist2(center, x).sqrt()).max(0.0),
            Region::Box { lo, hi } => {
                x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| (v - a).min(b - v)).fold(f64::INFINITY, f64::min).max(0.0)
            }
            Region::Voronoi { site, sites } => {
                bisectors(*site, sites).map(|(u, c)| (c - dot(&u, x)).max(0.0)).fold(f64::INFINITY, f64::min)
            }
            Region::Complement(r) => r.dist_to(x)?,
            Region::Intersection(a, b) => a.dist_to_complement(x)?.min(b.dist_to_complement(x)?),
            Region::Zone { .. } => return Err(Error::UnsupportedSetting("distance to a predicate zone".into())),
        })
    }
}

/// Unit-normal halfspaces `{x : u·x ≤ c}` whose intersection is the Voronoi cell.
pub(crate) fn bisectors(site: usize, sites: &[Vec<f64>]) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
    let own = &sites[site];
    sites.iter().enumerate().filter(move |(k, _)| *k != site).filter_map(move |(_, s)| {
        let u: Vec<f64> = s.iter().zip(own).map(|(a, b)| a - b).collect();
        let norm = dot(&u, &u).sqrt();
        if norm == 0.0 {
            // coincident sites impose no constraint
            return None;
        }
        let c = 0.5 * (dot(s, s) - dot(own, own)) / norm;
        Some((u.into_iter().map(|v| v / norm).collect(), c))
    })
}

/// Closed ball of diameter `delta` around the mean of component `k`
/// (an interval in one dimension).
pub fn ball_around_mean(spec: &MixtureSpec, k: usize, delta: f64) -> Result<Region> {
    if !(delta > 0.0) {
        return Err(Error::InvalidRegion(format!("diameter {delta} must be positive")));
    }
    let mu = &spec.component(k)?.mean;
    Ok(if mu.len() == 1 {
        Region::Interval { lo: mu[0] - delta / 2.0, hi: mu[0] + delta / 2.0 }
    } else {
        Region::Ball { center: mu.clone(), radius: delta / 2.0 }
    })
}

/// `{x : dist(x, S) ≤ δ and dist(x, S̄) ≤ δ}`.
///
/// Halfspaces, intervals, boxes and balls get an exact algebraic form. The
/// inner shrunk shape is pulled in by one ulp so that points at distance
/// exactly δ from the complement stay in the zone. Other shapes fall back to
/// [`Region::Zone`].
pub fn boundary_zone(s: &Region, delta: f64) -> Result<Region> {
    if !(delta > 0.0) {
        return Err(Error::InvalidRegion(format!("zone width {delta} must be positive")));
    }
    Ok(match s {
        Region::Halfspace { normal, offset } => {
            if offset.is_infinite() {
                return Ok(Region::empty(normal.len()));
            }
            let upper = Region::Halfspace { normal: normal.clone(), offset: offset + delta };
            let lower = Region::Halfspace { normal: normal.iter().map(|u| -u).collect(), offset: -(offset - delta) };
            upper.intersect(lower)
        }
        Region::Interval { lo, hi } => interval_zone(*lo, *hi, delta),
        Region::Box { lo, hi } => {
            let grown = Region::Box { lo: lo.iter().map(|a| a - delta).collect(), hi: hi.iter().map(|b| b + delta).collect() };
            let inner_lo: Vec<f64> = lo.iter().map(|a| (a + delta).next_up()).collect();
            let inner_hi: Vec<f64> = hi.iter().map(|b| (b - delta).next_down()).collect();
            if inner_lo.iter().zip(&inner_hi).any(|(a, b)| a > b) {
                grown
            } else {
                grown.intersect(Region::Box { lo: inner_lo, hi: inner_hi }.complement())
            }
        }
        Region::Ball { center, radius } => {
            let grown = Region::Ball { center: center.clone(), radius: radius + delta };
            if *radius > delta {
                grown.intersect(Region::Ball { center: center.clone(), radius: (radius - delta).next_down() }.complement())
            } else {
                grown
            }
        }
        Region::Complement(inner) => boundary_zone(inner, delta)?,
        Region::Zone { .. } => return Err(Error::UnsupportedSetting("boundary zone of a zone".into())),
        other => Region::Zone { base: Box::new(other.clone()), delta },
    })
}

fn interval_zone(lo: f64, hi: f64, delta: f64) -> Region {
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => Region::empty(1),
        (true, false) => Region::Interval { lo: lo - delta, hi: lo + delta },
        (false, true) => Region::Interval { lo: hi - delta, hi: hi + delta },
        (true, true) if hi - lo <= 2.0 * delta => Region::Interval { lo: lo - delta, hi: hi + delta },
        (true, true) => Region::Interval { lo: lo - delta, hi: hi + delta }
            .intersect(Region::Interval { lo: (lo + delta).next_up(), hi: (hi - delta).next_down() }.complement()),
    }
}

/// Whether `inner ⊆ outer`, decided exactly for ball/box/interval inside
/// halfspaces, boxes, intervals, Voronoi cells, their complements and
/// intersections. Other shape pairs are rejected.
pub fn is_subset(inner: &Region, outer: &Region) -> Result<bool> {
    let unsupported = || Error::UnsupportedSetting(format!("subset test for {} inside {}", shape_name(inner), shape_name(outer)));
    let inner_box = match inner {
        Region::Interval { lo, hi } => Some((vec![*lo], vec![*hi])),
        Region::Box { lo, hi } => Some((lo.clone(), hi.clone())),
        _ => None,
    };
    if !matches!(inner, Region::Ball { .. }) && inner_box.is_none() {
        return Err(unsupported());
    }
    // largest value of u·x over the inner shape
    let support = |u: &[f64]| -> f64 {
        match (inner, &inner_box) {
            (Region::Ball { center, radius }, _) => dot(u, center) + radius * dot(u, u).sqrt(),
            (_, Some((lo, hi))) => u
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&w, (&a, &b))| {
                    if w > 0.0 {
                        w * b
                    } else if w < 0.0 {
                        w * a
                    } else {
                        0.0
                    }
                })
                .sum(),
            _ => unreachable!(),
        }
    };
    match outer {
        Region::Halfspace { normal, offset } => Ok(support(normal) <= *offset),
        Region::Interval { lo, hi } => Ok(support(&[1.0]) <= *hi && -support(&[-1.0]) >= *lo),
        Region::Box { lo, hi } => {
            let d = lo.len();
            Ok((0..d).all(|j| {
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                let up = support(&e);
                e[j] = -1.0;
                up <= hi[j] && -support(&e) >= lo[j]
            }))
        }
        Region::Voronoi { site, sites } => Ok(bisectors(*site, sites).all(|(u, c)| support(&u) <= c)),
        Region::Intersection(a, b) => Ok(is_subset(inner, a)? && is_subset(inner, b)?),
        Region::Complement(c) => match c.as_ref() {
            // closure of {x·u > c} is {x·(−u) ≤ −c}
            Region::Halfspace { normal, offset } => Ok(support(&normal.iter().map(|u| -u).collect::<Vec<_>>()) <= -offset),
            Region::Interval { lo, hi } => Ok(support(&[1.0]) <= *lo || -support(&[-1.0]) >= *hi),
            Region::Box { lo, hi } => {
                // some face of the box separates it from the inner shape
                let d = lo.len();
                Ok((0..d).any(|j| {
                    let mut e = vec![0.0; d];
                    e[j] = 1.0;
                    let up = support(&e);
                    e[j] = -1.0;
                    up <= lo[j] || -support(&e) >= hi[j]
                }))
            }
            Region::Ball { center, radius } => match inner {
                Region::Ball { center: c2, radius: r2 } => Ok(dist2(center, c2).sqrt() >= radius + r2),
                _ => Err(unsupported()),
            },
            // sufficient: the inner shape lies beyond one bisector
            Region::Voronoi { site, sites } => Ok(bisectors(*site, sites).any(|(u, c)| {
                let neg: Vec<f64> = u.iter().map(|v| -v).collect();
                support(&neg) <= -c
            })),
            _ => Err(unsupported()),
        },
        _ => Err(unsupported()),
    }
}

pub(crate) fn shape_name(r: &Region) -> &'static str {
    match r {
        Region::Halfspace { .. } => "halfspace",
        Region::Interval { .. } => "interval",
        Region::Ball { .. } => "ball",
        Region::Box { .. } => "box",
        Region::Voronoi { .. } => "voronoi cell",
        Region::Complement(_) => "complement",
        Region::Intersection(..) => "intersection",
        Region::Zone { .. } => "zone",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::Ratio;

    fn line(c: f64) -> Region {
        Region::halfspace(vec![1.0], c).unwrap()
    }

    #[test]
    fn halfspace_membership() {
        assert!(line(0.0).contains(&[-0.5]).unwrap());
        assert!(!line(0.0).contains(&[0.5]).unwrap());
        assert!(line(0.0).contains(&[0.0]).unwrap());
        assert!(line(0.0).contains(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn ball_contains_center_and_complement_negates() {
        let b = Region::Ball { center: vec![1.0, 2.0], radius: 1.0 };
        assert!(b.contains(&[1.0, 2.0]).unwrap());
        let c = b.clone().complement();
        for x in [[1.0, 2.0], [2.0, 2.0], [3.0, 0.0]] {
            assert_eq!(c.contains(&x).unwrap(), !b.contains(&x).unwrap());
        }
    }

    #[test]
    fn voronoi_ties_belong_to_both_cells() {
        let sites = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        let a = Region::Voronoi { site: 0, sites: sites.clone() };
        let b = Region::Voronoi { site: 1, sites };
        assert!(a.contains(&[1.0, 5.0]).unwrap() && b.contains(&[1.0, 5.0]).unwrap());
        assert!(a.contains(&[0.9, 5.0]).unwrap() && !b.contains(&[0.9, 5.0]).unwrap());
    }

    #[test]
    fn mean_ball() {
        let spec = MixtureSpec::two_gaussians(2, Ratio::new(1, 2).unwrap(), 4.0, 1.0).unwrap();
        assert_eq!(ball_around_mean(&spec, 0, 2.0).unwrap(), Region::Ball { center: vec![0.0, 0.0], radius: 1.0 });
        let spec1 = MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), 4.0, 1.0).unwrap();
        assert_eq!(ball_around_mean(&spec1, 1, 1.0).unwrap(), Region::Interval { lo: 3.5, hi: 4.5 });
        assert!(ball_around_mean(&spec1, 2, 1.0).is_err());
    }

    #[test]
    fn halfspace_zone_is_slab() {
        let z = boundary_zone(&line(3.0), 1.0).unwrap();
        for (x, inside) in [(1.9, false), (2.0, true), (3.0, true), (4.0, true), (4.1, false)] {
            assert_eq!(z.contains(&[x]).unwrap(), inside, "x = {x}");
        }
    }

    #[test]
    fn box_zone() {
        let s = Region::Box { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] };
        let z = boundary_zone(&s, 0.5).unwrap();
        for (x, inside) in
            [([0.0, 0.0], false), ([0.5, 0.0], true), ([0.49, 0.0], false), ([1.5, 1.5], true), ([1.5, 1.51], false), ([-1.2, 0.3], true)]
        {
            assert_eq!(z.contains(&x).unwrap(), inside, "x = {x:?}");
        }
        assert_eq!(boundary_zone(&s.clone().complement(), 0.5).unwrap(), z);
    }

    #[test]
    fn interval_zone_splits_or_merges() {
        let z = boundary_zone(&Region::Interval { lo: 0.0, hi: 10.0 }, 1.0).unwrap();
        for (x, inside) in [(-1.0, true), (1.0, true), (1.01, false), (8.99, false), (9.0, true), (11.0, true), (11.01, false)] {
            assert_eq!(z.contains(&[x]).unwrap(), inside, "x = {x}");
        }
        let narrow = boundary_zone(&Region::Interval { lo: 0.0, hi: 1.0 }, 1.0).unwrap();
        assert_eq!(narrow, Region::Interval { lo: -1.0, hi: 2.0 });
    }

    #[test]
    fn voronoi_zone_is_predicate() {
        let sites = vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 3.0]];
        let z = boundary_zone(&Region::Voronoi { site: 0, sites }, 0.5).unwrap();
        assert!(matches!(z, Region::Zone { .. }));
        assert!(z.contains(&[2.0, 0.0]).unwrap());
        assert!(!z.contains(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn subset_checks() {
        let b = Region::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        assert!(is_subset(&b, &Region::axis_halfspace(2, 0, 1.0)).unwrap());
        assert!(!is_subset(&b, &Region::axis_halfspace(2, 0, 0.99)).unwrap());
        assert!(is_subset(&b, &Region::cube(&[0.0, 0.0], 1.0)).unwrap());
        assert!(!is_subset(&b, &Region::cube(&[0.1, 0.0], 1.0)).unwrap());
        let sites = vec![vec![0.0, 0.0], vec![4.0, 0.0]];
        assert!(is_subset(&b, &Region::Voronoi { site: 0, sites: sites.clone() }).unwrap());
        assert!(is_subset(&b, &Region::Voronoi { site: 1, sites }.complement()).unwrap());
        assert!(is_subset(&b, &Region::cube(&[5.0, 0.0], 2.0).complement()).unwrap());
        assert!(!is_subset(&b, &Region::cube(&[2.5, 0.0], 2.0).complement()).unwrap());
        assert!(is_subset(&Region::Interval { lo: -1.0, hi: 1.0 }, &Region::Interval { lo: -1.0, hi: 3.0 }).unwrap());
        assert!(is_subset(&b, &Region::Ball { center: vec![0.0, 0.0], radius: 2.0 }).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let r = Region::Box { lo: vec![0.0], hi: vec![1.0] }.complement().intersect(line(2.0));
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<Region>(&s).unwrap(), r);
    }
}
