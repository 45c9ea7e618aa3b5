//! Standard normal density, distribution function and quantile.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn std_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// φ(x | μ, σ²)
#[inline]
pub fn pdf(x: f64, mean: f64, sd: f64) -> f64 {
    std_pdf((x - mean) / sd) / sd
}

/// Φ(z), accurate in both tails.
#[inline]
pub fn std_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// 1 − Φ(z) without cancellation.
#[inline]
pub fn std_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// Mass of N(μ, σ²) on [a, b]; infinite endpoints allowed, empty if a ≥ b.
pub fn interval_mass(a: f64, b: f64, mean: f64, sd: f64) -> f64 {
    if !(a < b) {
        return 0.0;
    }
    let za = (a - mean) / sd;
    let zb = (b - mean) / sd;
    // difference taken on the side that avoids cancellation
    let p = if za >= 0.0 {
        std_sf(za) - std_sf(zb)
    } else if zb <= 0.0 {
        std_cdf(zb) - std_cdf(za)
    } else {
        1.0 - std_cdf(za) - std_sf(zb)
    };
    p.clamp(0.0, 1.0)
}

/// Φ⁻¹(p) for p ∈ (0, 1).
pub fn std_inv_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "quantile argument {p} outside (0,1)");
    -SQRT_2 * erfc_inv(2.0 * p)
}
