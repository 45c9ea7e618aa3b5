//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Integration result with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut gauss = fc * WG[3];
    let mut kron = fc * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok((kron * h, ((kron - gauss) * h).abs()))
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by global
/// bisection of the worst interval. Fails rather than returning a value whose
/// error estimate exceeds the tolerance.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Quad>
where
    F: FnMut(f64) -> Result<f64>,
{
    const MAX_INTERVALS: usize = 4000;
    if !(a < b) {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let (v, e) = kronrod(&mut f, a, b)?;
    let mut parts = vec![(a, b, v, e)];
    let mut err = e;
    while err > tol {
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence { what: "adaptive quadrature", error: err, tolerance: tol });
        }
        let (idx, _) = parts.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("nonempty");
        let (lo, hi, _, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine precision
            return Err(Error::NonConvergence { what: "adaptive quadrature", error: err, tolerance: tol });
        }
        let (v1, e1) = kronrod(&mut f, lo, mid)?;
        let (v2, e2) = kronrod(&mut f, mid, hi)?;
        err += e1 + e2 - pe;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    let value = parts.iter().map(|p| p.2).sum();
    let error = parts.iter().map(|p| p.3).sum();
    Ok(Quad { value, error })
}

/// Integrates over consecutive pieces separated by `breaks` (sorted, may be empty),
/// splitting the tolerance evenly. Kinks of the integrand belong in `breaks`.
pub fn integrate_pieces<F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<Quad>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pieces = (pts.len() - 1).max(1) as f64;
    let mut out = Quad { value: 0.0, error: 0.0 };
    for w in pts.windows(2) {
        let q = integrate(&mut f, w[0], w[1], tol / pieces)?;
        out.value += q.value;
        out.error += q.error;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| Ok(x.powi(5) - 3.0 * x * x), -1.0, 2.0, 1e-12).unwrap();
        assert!((q.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let q = integrate(|x: f64| Ok((1.0 - x * x).max(0.0).sqrt()), -1.0, 1.0, 1e-10).unwrap();
        assert!((q.value - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn kink_with_breaks() {
        let q = integrate_pieces(|x: f64| Ok(x.abs()), -1.0, 3.0, &[0.0], 1e-13).unwrap();
        assert!((q.value - 5.0).abs() < 1e-13);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|_| Ok(1.0), 2.0, 1.0, 1e-9).unwrap().value, 0.0);
    }

    #[test]
    fn reports_nonconvergence() {
        let r = integrate(|x: f64| Ok(if x > 0.3 { 1.0 / (x - 0.3).sqrt() } else { 0.0 }), 0.0, 1.0, 1e-15);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
