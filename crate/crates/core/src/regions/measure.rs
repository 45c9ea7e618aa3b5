//! Gaussian measures ν_k and ν̄ of regions.

use super::convex::{expand, piece_mass, PieceMass};
use super::Region;
use crate::error::{Error, Result};
use crate::mixture::{MixtureSpec, Which};
use crate::numeric::normal::std_inv_cdf;
use crate::numeric::qmc::{randomized_mean, REPLICATES};
use crate::numeric::rng::derive_seed;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    QuasiMonteCarlo,
}

/// A measure (or other integral) with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub value: f64,
    pub method: Method,
    /// Absolute error estimate: quadrature error bound, or one standard
    /// error for sampling. Zero for closed forms.
    pub error: f64,
    /// The value underestimates the true measure (inscribed-cube substitute).
    pub lower_bound: bool,
}

impl MeasureResult {
    pub fn exact(value: f64) -> Self {
        MeasureResult { value, method: Method::ClosedForm, error: 0.0, lower_bound: false }
    }
}

/// Budgets and tolerances for the numeric paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    /// Total quasi-Monte Carlo points per integral.
    pub qmc_points: usize,
    /// Seed of the randomized shifts.
    pub seed: u64,
    /// Absolute tolerance for quadrature.
    pub tolerance: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { qmc_points: 1 << 20, seed: 0x7a6e_17e5, tolerance: 1e-10 }
    }
}

/// ν_k(region) or ν̄(region) with default options.
pub fn measure(spec: &MixtureSpec, region: &Region, which: Which) -> Result<MeasureResult> {
    measure_with(spec, region, which, &NumericOptions::default())
}

pub fn measure_with(spec: &MixtureSpec, region: &Region, which: Which, opts: &NumericOptions) -> Result<MeasureResult> {
    region.validate(spec.dimension())?;
    let weights: Vec<(usize, f64)> = match which {
        Which::Component(k) => {
            spec.component(k)?;
            vec![(k, 1.0)]
        }
        Which::Mean => spec.ratios().into_iter().enumerate().collect(),
    };
    if let Some(r) = by_pieces(spec, region, &weights, opts)? {
        return Ok(r);
    }
    Ok(sampled(spec, region, &weights, opts))
}

fn by_pieces(spec: &MixtureSpec, region: &Region, weights: &[(usize, f64)], opts: &NumericOptions) -> Result<Option<MeasureResult>> {
    let Some(terms) = expand(region) else { return Ok(None) };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut method = Method::ClosedForm;
    let mut lower_bound = false;
    let tol = opts.tolerance / (terms.len().max(1) as f64);
    for &(k, w) in weights {
        let c = &spec.components()[k];
        for (coeff, piece) in &terms {
            let m = match piece_mass(piece, &c.mean, c.stddev, tol)? {
                None => return Ok(None),
                Some(PieceMass::Exact(v)) => v,
                Some(PieceMass::Quadrature(q)) => {
                    method = method.max(Method::Quadrature);
                    error += w * (*coeff as f64).abs() * q.error;
                    q.value
                }
                Some(PieceMass::CubeLowerBound(v)) => {
                    if *coeff < 0 {
                        // a subtracted lower bound is no bound at all
                        return Ok(None);
                    }
                    lower_bound = true;
                    v
                }
            };
            value += w * (*coeff as f64) * m;
        }
    }
    Ok(Some(MeasureResult { value: value.clamp(0.0, 1.0), method, error, lower_bound }))
}

fn sampled(spec: &MixtureSpec, region: &Region, weights: &[(usize, f64)], opts: &NumericOptions) -> MeasureResult {
    let d = spec.dimension();
    let mut value = 0.0;
    let mut var = 0.0;
    for &(k, w) in weights {
        let c = &spec.components()[k];
        let e = randomized_mean(d, opts.qmc_points, REPLICATES, derive_seed(opts.seed, k as u64), |u| {
            let mut x = [0.0; 16];
            let x = if d <= 16 { &mut x[..d] } else { return indicator_alloc(region, c, u) };
            for ((xi, ui), m) in x.iter_mut().zip(u).zip(&c.mean) {
                *xi = m + c.stddev * std_inv_cdf(*ui);
            }
            if region.contains_unchecked(x) {
                1.0
            } else {
                0.0
            }
        });
        value += w * e.value;
        var += (w * e.error).powi(2);
    }
    MeasureResult { value: value.clamp(0.0, 1.0), method: Method::QuasiMonteCarlo, error: var.sqrt(), lower_bound: false }
}

fn indicator_alloc(region: &Region, c: &crate::mixture::Component, u: &[f64]) -> f64 {
    let x: Vec<f64> = u.iter().zip(&c.mean).map(|(ui, m)| m + c.stddev * std_inv_cdf(*ui)).collect();
    if region.contains_unchecked(&x) {
        1.0
    } else {
        0.0
    }
}

/// True only when `a ∩ b` is certainly a null set.
pub fn provably_disjoint(a: &Region, b: &Region) -> Result<bool> {
    let both = a.clone().intersect(b.clone());
    if let Some(terms) = expand(&both) {
        return Ok(terms.is_empty());
    }
    // a predicate zone against a ball: both zone distances are 1-Lipschitz
    let zone_vs_ball = |z: &Region, other: &Region| -> Result<bool> {
        if let (Region::Zone { base, delta }, Region::Ball { center, radius }) = (z, other) {
            let near = base.dist_to(center)?;
            let far = base.dist_to_complement(center)?;
            return Ok(near - radius > *delta || far - radius > *delta);
        }
        if let (Region::Zone { base, delta }, Region::Interval { lo, hi }) = (z, other) {
            let c = [(lo + hi) / 2.0];
            let radius = (hi - lo) / 2.0;
            return Ok(base.dist_to(&c)? - radius > *delta || base.dist_to_complement(&c)? - radius > *delta);
        }
        Ok(false)
    };
    Ok(zone_vs_ball(a, b)? || zone_vs_ball(b, a)?)
}

/// Rejects regions that only admit a lower bound where an exact value is needed.
pub(crate) fn require_exact(r: MeasureResult, what: &str) -> Result<MeasureResult> {
    if r.lower_bound {
        return Err(Error::UnsupportedSetting(format!("{what} needs an exact measure, only a lower bound is available")));
    }
    Ok(r)
}
