//! Spherical Gaussian mixtures with exact rational ratios, hidden labelings
//! and reproducible dataset sampling.

use crate::error::{Error, Result};
use crate::numeric::normal;
use crate::numeric::rng;
use num_integer::Integer;
use num_rational::Ratio as Rational;
use num_traits::{CheckedAdd, One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// A positive rational mixing ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ratio(Rational<u64>);

impl Ratio {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 {
            return Err(Error::InvalidSpec(format!("ratio {numer}/{denom} must be positive")));
        }
        Ok(Ratio(Rational::new(numer, denom)))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    /// Reduced denominator.
    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `1 - self`, if positive.
    pub fn complement(&self) -> Result<Self> {
        if self.0 >= Rational::one() {
            return Err(Error::InvalidSpec(format!("ratio {self} has no positive complement")));
        }
        Ok(Ratio(Rational::one() - self.0))
    }

    /// `self * n` if it is an integer.
    pub fn times(&self, n: u64) -> Option<u64> {
        let (q, r) = n.div_rem(&self.denom());
        (r == 0).then(|| q * self.numer())
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Ratio {
    type Err = Error;

    /// Accepts `p/q`, integers and finite decimals (`0.35` is exactly 7/20).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("cannot parse ratio `{s}`"));
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>().map_err(|_| bad())?;
            let q = q.trim().parse::<u64>().map_err(|_| bad())?;
            return Ratio::new(p, q);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int = if int.is_empty() { 0 } else { int.parse::<u64>().map_err(|_| bad())? };
        let denom = 10u64.pow(frac.len() as u32);
        let frac = if frac.is_empty() { 0 } else { frac.parse::<u64>().map_err(|_| bad())? };
        let numer = int.checked_mul(denom).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
        Ratio::new(numer, denom)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(u64),
            Float(f64),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Text(s) => s,
            Raw::Int(i) => i.to_string(),
            // shortest round-trip representation, so 0.3 parses as 3/10
            Raw::Float(x) => format!("{x}"),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub ratio: Ratio,
    pub mean: Vec<f64>,
    pub stddev: f64,
}

/// Full description of a spherical Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    dimension: usize,
    components: Vec<Component>,
}

impl<'de> Deserialize<'de> for MixtureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dimension: usize,
            components: Vec<Component>,
        }
        let raw = Raw::deserialize(d)?;
        MixtureSpec::new(raw.dimension, raw.components).map_err(serde::de::Error::custom)
    }
}

impl MixtureSpec {
    pub fn new(dimension: usize, components: Vec<Component>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if components.is_empty() {
            return Err(Error::InvalidSpec("at least one component required".into()));
        }
        let mut total = Rational::<u64>::zero();
        for (k, c) in components.iter().enumerate() {
            if c.mean.len() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, got: c.mean.len() });
            }
            if !(c.stddev > 0.0 && c.stddev.is_finite()) {
                return Err(Error::InvalidSpec(format!("component {k}: stddev must be positive")));
            }
            if c.mean.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidSpec(format!("component {k}: mean must be finite")));
            }
            total = total.checked_add(&c.ratio.0).ok_or_else(|| Error::InvalidSpec("ratio sum overflows".into()))?;
        }
        if total != Rational::one() {
            return Err(Error::InvalidSpec(format!("ratios sum to {}/{} instead of 1", total.numer(), total.denom())));
        }
        Ok(MixtureSpec { dimension, components })
    }

    /// Two components with means `0` and `λ·e₁`, stddevs `1` and `α`, ratios `r`, `1 − r`.
    pub fn two_gaussians(dimension: usize, ratio: Ratio, lambda: f64, alpha: f64) -> Result<Self> {
        let mut far = vec![0.0; dimension];
        far[0] = lambda;
        MixtureSpec::new(
            dimension,
            vec![
                Component { ratio, mean: vec![0.0; dimension], stddev: 1.0 },
                Component { ratio: ratio.complement()?, mean: far, stddev: alpha },
            ],
        )
    }

    /// Three unit-variance planar components, equal ratios, means on an
    /// equilateral triangle of side `λ`.
    pub fn equilateral(lambda: f64) -> Result<Self> {
        let third = Ratio::new(1, 3)?;
        let h = lambda * 3f64.sqrt() / 2.0;
        let means = [vec![0.0, 0.0], vec![lambda, 0.0], vec![lambda / 2.0, h]];
        MixtureSpec::new(2, means.into_iter().map(|mean| Component { ratio: third, mean, stddev: 1.0 }).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, k: usize) -> Result<&Component> {
        self.components.get(k).ok_or(Error::InvalidComponent { index: k, count: self.components.len() })
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.ratio.to_f64()).collect()
    }

    /// The shared stddev if all components agree on it.
    pub fn common_stddev(&self) -> Option<f64> {
        let s = self.components[0].stddev;
        self.components.iter().all(|c| c.stddev == s).then_some(s)
    }

    pub fn max_stddev(&self) -> f64 {
        self.components.iter().map(|c| c.stddev).fold(0.0, f64::max)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        Ok(())
    }
}

/// Which density or measure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Component(usize),
    Mean,
}

/// Counts `n_k = r_k · n`, or the first component whose count is fractional.
pub fn compatible_counts(spec: &MixtureSpec, n: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::Incompatible { n, component: 0 });
    }
    spec.components.iter().enumerate().map(|(k, c)| c.ratio.times(n).ok_or(Error::Incompatible { n, component: k })).collect()
}

/// Smallest compatible n: the lcm of the reduced denominators.
pub fn compatibility_step(spec: &MixtureSpec) -> u64 {
    spec.components.iter().fold(1u64, |acc, c| acc.lcm(&c.ratio.denom()))
}

/// Assignment of data indices to components with fixed counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenLabeling {
    counts: Vec<u64>,
    labels: Vec<usize>,
}

impl HiddenLabeling {
    /// Block layout: the first `n_1` indices belong to component 0, and so on.
    pub fn canonical(spec: &MixtureSpec, n: u64) -> Result<Self> {
        let counts = compatible_counts(spec, n)?;
        let labels = counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c as usize)).collect();
        Ok(HiddenLabeling { counts, labels })
    }

    /// Arbitrary labeling; must match the spec's counts.
    pub fn from_labels(spec: &MixtureSpec, labels: Vec<usize>) -> Result<Self> {
        let counts = compatible_counts(spec, labels.len() as u64)?;
        let mut seen = vec![0u64; spec.len()];
        for &l in &labels {
            *seen.get_mut(l).ok_or(Error::InvalidComponent { index: l, count: spec.len() })? += 1;
        }
        if seen != counts {
            return Err(Error::InvalidSpec(format!("label counts {seen:?} differ from required {counts:?}")));
        }
        Ok(HiddenLabeling { counts, labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// A d×n data matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    data: Vec<f64>,
    seed: u64,
}

impl Dataset {
    pub fn from_columns(dim: usize, data: Vec<f64>, seed: u64) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: data.len() });
        }
        Ok(Dataset { dim, data, seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn columns(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }
}

/// Draws column i from N(μ_{ℓ(i)}, σ²_{ℓ(i)} I) using the stream `(seed, i)`.
pub fn sample_dataset(spec: &MixtureSpec, labeling: &HiddenLabeling, seed: u64) -> Result<Dataset> {
    let d = spec.dimension;
    if labeling.counts.len() != spec.len() {
        return Err(Error::DimensionMismatch { expected: spec.len(), got: labeling.counts.len() });
    }
    let mut data = vec![0.0; d * labeling.n()];
    let fill = |(i, col): (usize, &mut [f64])| {
        let c = &spec.components[labeling.labels[i]];
        let mut r = rng::stream(seed, i as u64);
        for (x, m) in col.iter_mut().zip(&c.mean) {
            *x = m + c.stddev * rng::std_normal(&mut r);
        }
    };
    if labeling.n() >= 4096 {
        data.par_chunks_mut(d).enumerate().for_each(fill);
    } else {
        data.chunks_mut(d).enumerate().for_each(fill);
    }
    Ok(Dataset { dim: d, data, seed })
}

fn component_density(c: &Component, x: &[f64]) -> f64 {
    x.iter().zip(&c.mean).map(|(&xi, &m)| normal::pdf(xi, m, c.stddev)).product()
}

/// f_k(x) or the mean density f̄(x) = Σ r_k f_k(x).
pub fn density_at(spec: &MixtureSpec, x: &[f64], which: Which) -> Result<f64> {
    spec.check_point(x)?;
    Ok(match which {
        Which::Component(k) => component_density(spec.component(k)?, x),
        Which::Mean => mean_density(spec, x),
    })
}

#[inline]
pub(crate) fn mean_density(spec: &MixtureSpec, x: &[f64]) -> f64 {
    spec.components.iter().map(|c| c.ratio.to_f64() * component_density(c, x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves() -> MixtureSpec {
        MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), 4.0, 1.0).unwrap()
    }

    fn thirds() -> MixtureSpec {
        MixtureSpec::two_gaussians(1, Ratio::new(1, 3).unwrap(), 4.0, 1.0).unwrap()
    }

    #[test]
    fn counts_for_halves() {
        assert_eq!(compatible_counts(&halves(), 10).unwrap(), vec![5, 5]);
    }

    #[test]
    fn thirds_incompatible_with_ten() {
        assert_eq!(compatible_counts(&thirds(), 10), Err(Error::Incompatible { n: 10, component: 0 }));
        assert_eq!(compatible_counts(&thirds(), 9).unwrap(), vec![3, 6]);
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!("0.35".parse::<Ratio>().unwrap(), Ratio::new(7, 20).unwrap());
        assert_eq!("2/6".parse::<Ratio>().unwrap().to_string(), "1/3");
        assert!("0".parse::<Ratio>().is_err());
        assert!("-1/2".parse::<Ratio>().is_err());
        let r: Ratio = serde_json::from_str("0.3").unwrap();
        assert_eq!(r, Ratio::new(3, 10).unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        let r = Ratio::new(1, 2).unwrap();
        let c = |m: Vec<f64>, s| Component { ratio: r, mean: m, stddev: s };
        assert!(MixtureSpec::new(1, vec![c(vec![0.0], 1.0)]).is_err()); // sums to 1/2
        assert!(MixtureSpec::new(1, vec![c(vec![0.0], 1.0), c(vec![0.0, 1.0], 1.0)]).is_err());
        assert!(MixtureSpec::new(1, vec![c(vec![0.0], 1.0), c(vec![1.0], 0.0)]).is_err());
        assert!(MixtureSpec::new(1, vec![]).is_err());
    }

    #[test]
    fn standard_density_at_zero() {
        let spec = MixtureSpec::new(1, vec![Component { ratio: Ratio::new(1, 1).unwrap(), mean: vec![0.0], stddev: 1.0 }]).unwrap();
        let v = density_at(&spec, &[0.0], Which::Mean).unwrap();
        assert!((v - 0.398942).abs() < 1e-6);
    }

    #[test]
    fn symmetric_pair_density() {
        let spec = halves();
        let a = density_at(&spec, &[0.0], Which::Mean).unwrap();
        let b = density_at(&spec, &[4.0], Which::Mean).unwrap();
        assert!((a - b).abs() < 1e-16);
        let mix =
            0.5 * density_at(&spec, &[1.3], Which::Component(0)).unwrap() + 0.5 * density_at(&spec, &[1.3], Which::Component(1)).unwrap();
        assert!((mix - density_at(&spec, &[1.3], Which::Mean).unwrap()).abs() < 1e-16);
        assert!(density_at(&spec, &[1.3], Which::Component(2)).is_err());
    }

    #[test]
    fn canonical_labeling_blocks() {
        let l = HiddenLabeling::canonical(&thirds(), 6).unwrap();
        assert_eq!(l.labels(), &[0, 0, 1, 1, 1, 1]);
        assert!(HiddenLabeling::from_labels(&thirds(), vec![1, 0, 1, 1, 0, 1]).is_ok());
        assert!(HiddenLabeling::from_labels(&thirds(), vec![1, 1, 1, 1, 0, 1]).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = halves();
        let l = HiddenLabeling::canonical(&spec, 50).unwrap();
        let a = sample_dataset(&spec, &l, 9).unwrap();
        let b = sample_dataset(&spec, &l, 9).unwrap();
        let c = sample_dataset(&spec, &l, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_variance_sits_on_means() {
        let r = Ratio::new(1, 2).unwrap();
        let spec = MixtureSpec::new(
            2,
            vec![Component { ratio: r, mean: vec![1.0, -2.0], stddev: 1e-12 }, Component { ratio: r, mean: vec![5.0, 3.0], stddev: 1e-12 }],
        )
        .unwrap();
        let l = HiddenLabeling::canonical(&spec, 20).unwrap();
        let data = sample_dataset(&spec, &l, 1).unwrap();
        for (i, col) in data.columns().enumerate() {
            let m = &spec.components()[l.labels()[i]].mean;
            assert!(col.iter().zip(m).all(|(x, y)| (x - y).abs() < 1e-6));
        }
    }

    #[test]
    fn step_is_lcm_of_denominators() {
        let spec = MixtureSpec::new(
            1,
            vec![
                Component { ratio: Ratio::new(1, 4).unwrap(), mean: vec![0.0], stddev: 1.0 },
                Component { ratio: Ratio::new(1, 6).unwrap(), mean: vec![1.0], stddev: 1.0 },
                Component { ratio: Ratio::new(7, 12).unwrap(), mean: vec![2.0], stddev: 1.0 },
            ],
        )
        .unwrap();
        assert_eq!(compatibility_step(&spec), 12);
    }
}
