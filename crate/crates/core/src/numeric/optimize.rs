//! One-dimensional search: golden section, grid scans and bracketed roots.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[a, b]` to interval width `tol`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Global minimizer of `f` on `[a, b]`: a `scan`-point grid followed by golden
/// section on the bracket around the best grid point.
pub fn scan_golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, scan: usize, tol: f64) -> f64 {
    let scan = scan.max(2);
    let h = (b - a) / (scan - 1) as f64;
    let mut best = (a, f(a));
    for i in 1..scan {
        let x = if i == scan - 1 { b } else { a + h * i as f64 };
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let (x, negf) = golden_max(|x| -f(x), lo, hi, tol);
    // keep an endpoint optimum exact
    if best.1 <= -negf {
        best.0
    } else {
        x
    }
}

/// Bisection for a sign change of `g` on `[lo, hi]` where `g(lo) ≤ 0 < g(hi)`.
/// Returns the upper end of the final bracket, so `g` is positive there.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(mut g: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let glo = g(lo)?;
    let ghi = g(hi)?;
    if glo > 0.0 || ghi <= 0.0 {
        return Err(Error::NotFound(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest grid cell `[x_i, x_{i+1}]` on which `g` turns positive, scanning upward.
pub fn first_positive_cell<F: FnMut(f64) -> Result<f64>>(mut g: F, grid: &[f64]) -> Result<Option<(f64, f64)>> {
    let mut prev: Option<f64> = None;
    for &x in grid {
        if g(x)? > 0.0 {
            return Ok(Some((prev.unwrap_or(x), x)));
        }
        prev = Some(x);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| -(x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_picks_global_minimum() {
        let f = |x: f64| (3.0 * x).cos() + 0.1 * x;
        let x = scan_golden_min(f, 0.0, 6.0, 1024, 1e-12);
        let brute = (0..600_001).map(|i| i as f64 * 1e-5).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        assert!((x - brute).abs() < 2e-5);
    }

    #[test]
    fn scan_returns_endpoint_for_monotone() {
        assert_eq!(scan_golden_min(|x| -x, 1.0, 2.0, 1024, 1e-12), 2.0);
    }

    #[test]
    fn bisection_root() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
        assert!(bisect(Ok, 1.0, 2.0, 1e-3).is_err());
    }
}
