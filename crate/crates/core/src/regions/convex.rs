//! Regions as signed sums of convex pieces.
//!
//! Indicators obey 1_{R̄} = 1 − 1_R and 1_{X∩Y} = 1_X·1_Y, so every region
//! without a predicate zone is Σ c_i·1_{C_i} with each C_i an intersection of
//! halfspaces and balls. Gaussian measures then split over the pieces.

use super::{bisectors, dot, Region};
use crate::error::Result;
use crate::numeric::normal::interval_mass;
use crate::numeric::quad::{integrate_pieces, Quad};

/// Parallel-normal tolerance.
const PARALLEL: f64 = 1e-13;
/// Pieces beyond this count are left to sampling.
const MAX_TERMS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Convex {
    /// `{x : u·x ≤ c}` with unit `u`.
    pub half: Vec<(Vec<f64>, f64)>,
    pub balls: Vec<(Vec<f64>, f64)>,
    /// Known to be empty up to a null set.
    pub null: bool,
}

impl Convex {
    fn whole() -> Convex {
        Convex { half: vec![], balls: vec![], null: false }
    }

    fn null() -> Convex {
        Convex { half: vec![], balls: vec![], null: true }
    }

    fn and(mut self, other: &Convex) -> Convex {
        self.null |= other.null;
        self.half.extend(other.half.iter().cloned());
        self.balls.extend(other.balls.iter().cloned());
        self.simplify()
    }

    /// Drops redundant constraints, detects null sets, sorts into canonical order.
    pub fn simplify(mut self) -> Convex {
        if self.null {
            return Convex::null();
        }
        let mut half: Vec<(Vec<f64>, f64)> = Vec::with_capacity(self.half.len());
        for (u, c) in self.half.drain(..) {
            if c == f64::INFINITY {
                continue;
            }
            if c == f64::NEG_INFINITY {
                return Convex::null();
            }
            if let Some(h) = half.iter_mut().find(|(v, _)| same_direction(v, &u)) {
                h.1 = h.1.min(c);
            } else {
                half.push((u, c));
            }
        }
        for (i, (u, c)) in half.iter().enumerate() {
            for (v, e) in &half[i + 1..] {
                // u·x ≤ c together with −u·x ≤ e needs −e ≤ c
                if opposite_direction(u, v) && c + e <= 0.0 {
                    return Convex::null();
                }
            }
        }
        let mut balls: Vec<(Vec<f64>, f64)> = Vec::with_capacity(self.balls.len());
        for (p, r) in self.balls.drain(..) {
            if r <= 0.0 {
                return Convex::null();
            }
            balls.push((p, r));
        }
        for i in 0..balls.len() {
            for j in i + 1..balls.len() {
                let dist = dist(&balls[i].0, &balls[j].0);
                if dist >= balls[i].1 + balls[j].1 {
                    return Convex::null();
                }
            }
        }
        // drop balls containing another ball
        let mut keep = vec![true; balls.len()];
        for i in 0..balls.len() {
            for j in 0..balls.len() {
                if i != j && keep[j] && keep[i] {
                    let dist = dist(&balls[i].0, &balls[j].0);
                    if dist + balls[j].1 <= balls[i].1 {
                        keep[i] = false;
                    }
                }
            }
        }
        let balls: Vec<_> = balls.into_iter().zip(keep).filter_map(|(b, k)| k.then_some(b)).collect();
        let mut kept = Vec::with_capacity(half.len());
        for (u, c) in half {
            let mut redundant = false;
            for (p, r) in &balls {
                let s = dot(&u, p);
                if s - r >= c {
                    return Convex::null();
                }
                redundant |= s + r <= c;
            }
            if !redundant {
                kept.push((u, c));
            }
        }
        let mut half = kept;
        half.sort_by(cmp_pair);
        let mut balls = balls;
        balls.sort_by(cmp_pair);
        Convex { half, balls, null: false }
    }

    pub fn is_whole(&self) -> bool {
        !self.null && self.half.is_empty() && self.balls.is_empty()
    }
}

fn cmp_pair(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> std::cmp::Ordering {
    a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal).then(a.1.total_cmp(&b.1))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn same_direction(u: &[f64], v: &[f64]) -> bool {
    u.iter().zip(v).all(|(a, b)| (a - b).abs() <= PARALLEL)
}

fn opposite_direction(u: &[f64], v: &[f64]) -> bool {
    u.iter().zip(v).all(|(a, b)| (a + b).abs() <= PARALLEL)
}

fn primitive(region: &Region) -> Option<Convex> {
    let mut c = Convex::whole();
    match region {
        Region::Halfspace { normal, offset } => c.half.push((normal.clone(), *offset)),
        Region::Interval { lo, hi } => {
            c.half.push((vec![1.0], *hi));
            c.half.push((vec![-1.0], -lo));
        }
        Region::Ball { center, radius } => c.balls.push((center.clone(), *radius)),
        Region::Box { lo, hi } => {
            let d = lo.len();
            for j in 0..d {
                let mut e = vec![0.0; d];
                e[j] = 1.0;
                c.half.push((e.clone(), hi[j]));
                e[j] = -1.0;
                c.half.push((e, -lo[j]));
            }
        }
        Region::Voronoi { site, sites } => c.half.extend(bisectors(*site, sites)),
        _ => return None,
    }
    Some(c.simplify())
}

/// Signed convex decomposition; `None` for predicate zones or blow-up.
pub(crate) fn expand(region: &Region) -> Option<Vec<(i64, Convex)>> {
    let terms = match region {
        Region::Complement(inner) => {
            let mut out = vec![(1, Convex::whole())];
            out.extend(expand(inner)?.into_iter().map(|(c, k)| (-c, k)));
            out
        }
        Region::Intersection(a, b) => {
            let ta = expand(a)?;
            let tb = expand(b)?;
            if ta.len() * tb.len() > MAX_TERMS {
                return None;
            }
            let mut out = Vec::with_capacity(ta.len() * tb.len());
            for (ca, ka) in &ta {
                for (cb, kb) in &tb {
                    out.push((ca * cb, ka.clone().and(kb)));
                }
            }
            out
        }
        Region::Zone { .. } => return None,
        p => vec![(1, primitive(p)?)],
    };
    Some(merge(terms))
}

fn merge(terms: Vec<(i64, Convex)>) -> Vec<(i64, Convex)> {
    let mut out: Vec<(i64, Convex)> = Vec::with_capacity(terms.len());
    for (c, k) in terms {
        if k.null || c == 0 {
            continue;
        }
        if let Some(t) = out.iter_mut().find(|t| t.1 == k) {
            t.0 += c;
        } else {
            out.push((c, k));
        }
    }
    out.retain(|t| t.0 != 0);
    out
}

/// Outcome of integrating one convex piece against one Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PieceMass {
    Exact(f64),
    Quadrature(Quad),
    /// Lower bound from the largest inscribed axis cube of the ball.
    CubeLowerBound(f64),
}

/// Mass of a convex piece under N(mean, sd² I), or `None` when only sampling applies.
pub(crate) fn piece_mass(piece: &Convex, mean: &[f64], sd: f64, tol: f64) -> Result<Option<PieceMass>> {
    if piece.null {
        return Ok(Some(PieceMass::Exact(0.0)));
    }
    if piece.is_whole() {
        return Ok(Some(PieceMass::Exact(1.0)));
    }
    let d = mean.len();
    if d == 1 {
        let (lo, hi) = interval_1d(piece);
        return Ok(Some(PieceMass::Exact(interval_mass(lo, hi, mean[0], sd))));
    }
    if piece.balls.is_empty() {
        if let Some(v) = slab_mass(piece, mean, sd) {
            return Ok(Some(PieceMass::Exact(v)));
        }
        if let Some(v) = axis_box_mass(piece, mean, sd) {
            return Ok(Some(PieceMass::Exact(v)));
        }
    }
    if d <= 3 {
        return Ok(Some(PieceMass::Quadrature(sliced_mass(piece, mean, sd, tol)?)));
    }
    if piece.balls.len() == 1 {
        let (p, r) = &piece.balls[0];
        let h = r / (d as f64).sqrt();
        let mut cube = Convex { half: piece.half.clone(), balls: vec![], null: false };
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            cube.half.push((e.clone(), p[j] + h));
            e[j] = -1.0;
            cube.half.push((e, -(p[j] - h)));
        }
        let cube = cube.simplify();
        if let Some(v) = axis_box_mass(&cube, mean, sd) {
            return Ok(Some(PieceMass::CubeLowerBound(v)));
        }
    }
    Ok(None)
}

fn interval_1d(piece: &Convex) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (u, c) in &piece.half {
        if u[0] > 0.0 {
            hi = hi.min(c / u[0]);
        } else {
            lo = lo.max(c / u[0]);
        }
    }
    for (p, r) in &piece.balls {
        lo = lo.max(p[0] - r);
        hi = hi.min(p[0] + r);
    }
    (lo, hi)
}

/// All normals parallel to one direction: a Φ difference along it.
fn slab_mass(piece: &Convex, mean: &[f64], sd: f64) -> Option<f64> {
    let u0 = &piece.half[0].0;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (u, c) in &piece.half {
        if same_direction(u, u0) {
            hi = hi.min(*c);
        } else if opposite_direction(u, u0) {
            lo = lo.max(-c);
        } else {
            return None;
        }
    }
    Some(interval_mass(lo, hi, dot(u0, mean), sd))
}

/// All normals are ± coordinate axes: a product of Φ differences.
fn axis_box_mass(piece: &Convex, mean: &[f64], sd: f64) -> Option<f64> {
    let d = mean.len();
    let mut lo = vec![f64::NEG_INFINITY; d];
    let mut hi = vec![f64::INFINITY; d];
    for (u, c) in &piece.half {
        let mut axis = None;
        for (j, &v) in u.iter().enumerate() {
            if v != 0.0 {
                if axis.is_some() {
                    return None;
                }
                axis = Some((j, v));
            }
        }
        let (j, v) = axis?;
        if (v.abs() - 1.0).abs() > PARALLEL {
            return None;
        }
        if v > 0.0 {
            hi[j] = hi[j].min(*c);
        } else {
            lo[j] = lo[j].max(-c);
        }
    }
    Some((0..d).map(|j| interval_mass(lo[j], hi[j], mean[j], sd)).product())
}

/// Section of a piece at first coordinate `t`, as a piece in one dimension less.
fn slice(piece: &Convex, t: f64) -> Convex {
    let mut out = Convex::whole();
    for (u, c) in &piece.half {
        let rest = &u[1..];
        let n = dot(rest, rest).sqrt();
        let c2 = c - u[0] * t;
        if n < 1e-14 {
            if c2 < 0.0 {
                return Convex::null();
            }
        } else {
            out.half.push((rest.iter().map(|v| v / n).collect(), c2 / n));
        }
    }
    for (p, r) in &piece.balls {
        let h = r * r - (t - p[0]) * (t - p[0]);
        if h <= 0.0 {
            return Convex::null();
        }
        out.balls.push((p[1..].to_vec(), h.sqrt()));
    }
    out.simplify()
}

/// Iterated quadrature over the first coordinate; sections are recursed.
fn sliced_mass(piece: &Convex, mean: &[f64], sd: f64, tol: f64) -> Result<Quad> {
    const REACH: f64 = 10.0;
    let mut lo = mean[0] - REACH * sd;
    let mut hi = mean[0] + REACH * sd;
    for (p, r) in &piece.balls {
        lo = lo.max(p[0] - r);
        hi = hi.min(p[0] + r);
    }
    let mut breaks = vec![mean[0]];
    for (u, c) in &piece.half {
        let n = dot(&u[1..], &u[1..]).sqrt();
        if n < 1e-14 {
            if u[0] > 0.0 {
                hi = hi.min(c / u[0]);
            } else {
                lo = lo.max(c / u[0]);
            }
        }
    }
    if !(lo < hi) {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    if mean.len() == 2 {
        breaks.extend(planar_kinks(piece));
    }
    let inner_tol = 0.25 * tol;
    let mut inner_err: f64 = 0.0;
    let q = integrate_pieces(
        |t| {
            let s = slice(piece, t);
            let w = crate::numeric::normal::pdf(t, mean[0], sd);
            let m = match piece_mass(&s, &mean[1..], sd, inner_tol)? {
                Some(PieceMass::Exact(v)) | Some(PieceMass::CubeLowerBound(v)) => v,
                Some(PieceMass::Quadrature(q)) => {
                    inner_err = inner_err.max(q.error);
                    q.value
                }
                None => unreachable!("sections of low-dimensional pieces always integrate"),
            };
            Ok(w * m)
        },
        lo,
        hi,
        &breaks,
        0.5 * tol,
    )?;
    Ok(Quad { value: q.value.clamp(0.0, 1.0), error: q.error + inner_err })
}

/// First coordinates where the boundary of a planar piece changes shape.
fn planar_kinks(piece: &Convex) -> Vec<f64> {
    let mut out = Vec::new();
    for (i, (u, c)) in piece.half.iter().enumerate() {
        for (v, e) in &piece.half[i + 1..] {
            let det = u[0] * v[1] - u[1] * v[0];
            if det.abs() > 1e-14 {
                out.push((c * v[1] - e * u[1]) / det);
            }
        }
        for (p, r) in &piece.balls {
            // points p + r(cos θ, sin θ) on the line u·x = c
            let s = c - dot(u, p);
            if s.abs() < *r {
                let along = (r * r - s * s).sqrt();
                let foot = [p[0] + s * u[0], p[1] + s * u[1]];
                out.push(foot[0] - along * u[1]);
                out.push(foot[0] + along * u[1]);
            }
        }
    }
    out.retain(|x| x.is_finite());
    out
}
