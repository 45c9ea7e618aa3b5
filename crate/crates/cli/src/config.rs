//! JSON experiment configuration and its validation.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use tanglebounds_core::bounds::{BoundOptions, CliqueShape, CutAssignment, SeparabilityCondition, ThresholdKind};
use tanglebounds_core::{MixtureSpec, NumericOptions, Ratio};

pub const FIGURES: [&str; 10] = ["fig2a", "fig2b", "fig2c", "fig2d", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a", "fig5b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Threshold,
    Bound,
    Simulate,
    Verify,
    Reproduce,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Threshold => "threshold",
            CommandKind::Bound => "bound",
            CommandKind::Simulate => "simulate",
            CommandKind::Verify => "verify",
            CommandKind::Reproduce => "reproduce",
        }
    }
}

/// Mixture family; λ comes from the sweep unless the spec is explicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixtureConfig {
    /// Means at 0 and λ·e₁, standard deviations 1 and α.
    TwoGaussians {
        #[serde(default = "one")]
        dimension: usize,
        #[serde(default = "half")]
        ratio: Ratio,
        #[serde(default = "unit")]
        alpha: f64,
    },
    /// Three unit Gaussians in the plane on an equilateral triangle of side λ.
    Equilateral,
    Explicit {
        spec: MixtureSpec,
    },
}

fn one() -> usize {
    1
}

fn half() -> Ratio {
    Ratio::new(1, 2).expect("1/2 is a valid ratio")
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphModel {
    #[default]
    Delta,
    /// Gaussian kernel with bandwidth equal to the common standard deviation.
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutConfig {
    /// Threshold at the mean-density minimum between two means on the line.
    Valley,
    /// Halfspace through the midpoint of each pair of means.
    Midpoint,
    Voronoi,
    /// Cube around the smaller index's mean; half-widths from `sweep.half_width`.
    Cubes,
}

/// A list of values, or `steps` evenly spaced values from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range { from: f64, to: f64, steps: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Range { from, to, steps } => match steps {
                0 => vec![],
                1 => vec![*from],
                _ => (0..*steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda: Option<Axis>,
    #[serde(default)]
    pub n: Vec<u64>,
    /// δ (neighborhood graphs) or Δ (kernel graphs) candidates.
    pub radius: Option<Axis>,
    /// One row per radius value instead of optimizing over them.
    #[serde(default)]
    pub radius_per_row: bool,
    pub half_width: Option<Axis>,
    #[serde(default)]
    pub ratio: Vec<Ratio>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub dimension: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    TwoThirds,
    RootTwoThirds,
    LargeNDelta,
    LargeNWeight,
    SmallNDelta,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::TwoThirds => "two_thirds",
            Condition::RootTwoThirds => "root_two_thirds",
            Condition::LargeNDelta => "large_n_delta",
            Condition::LargeNWeight => "large_n_weight",
            Condition::SmallNDelta => "small_n_delta",
        }
    }

    pub fn separability(self) -> Option<SeparabilityCondition> {
        match self {
            Condition::TwoThirds => Some(SeparabilityCondition::TwoThirds),
            Condition::RootTwoThirds => Some(SeparabilityCondition::RootTwoThirds),
            _ => None,
        }
    }

    pub fn family_kind(self) -> Option<ThresholdKind> {
        match self {
            Condition::LargeNDelta => Some(ThresholdKind::LargeNDelta),
            Condition::LargeNWeight => Some(ThresholdKind::LargeNWeight),
            Condition::SmallNDelta => Some(ThresholdKind::SmallNDelta),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    pub figure: Option<String>,
    pub mixture: Option<MixtureConfig>,
    #[serde(default)]
    pub graph: GraphModel,
    pub cut: Option<CutConfig>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub conditions: Vec<Condition>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub clique_shape: CliqueShape,
    pub numeric: Option<NumericOptions>,
    /// QMC budget for re-checking threshold slacks at the chosen parameter.
    pub confirm_qmc_points: Option<usize>,
    /// File stem for the outputs.
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn empty() -> Self {
        ExperimentConfig {
            command: None,
            figure: None,
            mixture: None,
            graph: GraphModel::Delta,
            cut: None,
            sweep: SweepConfig::default(),
            conditions: vec![],
            trials: None,
            seed: None,
            clique_shape: CliqueShape::Auto,
            numeric: None,
            confirm_qmc_points: None,
            output: None,
        }
    }

    pub fn bound_options(&self) -> BoundOptions {
        BoundOptions { shape: self.clique_shape, numeric: self.numeric.unwrap_or_default(), ..BoundOptions::default() }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("configs serialize");
        hex(&Sha256::digest(text.as_bytes()))
    }

    /// Closed-form separability thresholds need no λ grid.
    fn needs_lambda(&self, command: CommandKind) -> bool {
        command != CommandKind::Threshold || self.conditions.iter().any(|c| c.separability().is_none())
    }

    /// Checks everything serde cannot, for the given command.
    pub fn validate(&self, command: CommandKind) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::schema("command", format!("config is for `{}`, invoked as `{}`", c.name(), command.name())));
            }
        }
        if let Some(f) = &self.figure {
            if !FIGURES.contains(&f.as_str()) {
                return Err(CliError::schema("figure", format!("unknown figure `{f}`, expected one of {}", FIGURES.join(", "))));
            }
        }
        if command == CommandKind::Verify {
            return Ok(());
        }
        if command == CommandKind::Simulate {
            if self.seed.is_none() {
                return Err(CliError::schema("seed", "required for simulate"));
            }
            match self.trials {
                None => return Err(CliError::schema("trials", "required for simulate")),
                Some(0) => return Err(CliError::schema("trials", "must be positive")),
                _ => {}
            }
        }
        if self.mixture.is_none() {
            return Err(CliError::schema("mixture", "required"));
        }
        let explicit = matches!(self.mixture, Some(MixtureConfig::Explicit { .. }));
        let s = &self.sweep;
        if explicit {
            if s.lambda.is_some() {
                return Err(CliError::schema("sweep.lambda", "not allowed with an explicit mixture"));
            }
        } else if self.needs_lambda(command) {
            nonempty_axis(&s.lambda, "sweep.lambda")?;
        }
        for (axis, path) in [(&s.radius, "sweep.radius"), (&s.half_width, "sweep.half_width")] {
            if let Some(a) = axis {
                let v = a.values();
                if v.is_empty() {
                    return Err(CliError::schema(path, "empty sweep"));
                }
                if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(CliError::schema(path, "values must be positive and finite"));
                }
            }
        }
        if let Some(l) = &s.lambda {
            if l.values().iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(CliError::schema("sweep.lambda", "values must be nonnegative and finite"));
            }
        }
        if s.alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(CliError::schema("sweep.alpha", "values must be positive and finite"));
        }
        if s.dimension.contains(&0) {
            return Err(CliError::schema("sweep.dimension", "dimensions must be positive"));
        }
        if (!s.ratio.is_empty() || !s.alpha.is_empty() || !s.dimension.is_empty())
            && !matches!(self.mixture, Some(MixtureConfig::TwoGaussians { .. }))
        {
            return Err(CliError::schema("sweep", "ratio, alpha and dimension sweeps need the two_gaussians family"));
        }
        match command {
            CommandKind::Threshold => {
                if self.conditions.is_empty() {
                    return Err(CliError::schema("conditions", "threshold needs at least one condition"));
                }
                if explicit {
                    return Err(CliError::schema("mixture.family", "threshold searches over λ and needs a parametric family"));
                }
                if self.conditions.iter().any(|c| c.family_kind().is_some()) {
                    nonempty_axis(&s.radius, "sweep.radius")?;
                    if self.cut == Some(CutConfig::Cubes) {
                        return Err(CliError::schema("cut.kind", "cube cuts have no threshold search; use bound"));
                    }
                }
            }
            CommandKind::Bound | CommandKind::Simulate => {
                if s.n.is_empty() {
                    return Err(CliError::schema("sweep.n", "empty sweep"));
                }
                if s.n.contains(&0) {
                    return Err(CliError::schema("sweep.n", "n must be positive"));
                }
                nonempty_axis(&s.radius, "sweep.radius")?;
            }
            _ => {}
        }
        if self.cut.is_none() && self.conditions.iter().any(|c| c.family_kind().is_some()) {
            return Err(CliError::schema("cut", "required for this condition"));
        }
        if matches!(command, CommandKind::Bound | CommandKind::Simulate) && self.cut.is_none() {
            return Err(CliError::schema("cut", "required"));
        }
        if self.cut == Some(CutConfig::Cubes) {
            nonempty_axis(&s.half_width, "sweep.half_width")?;
        }
        if let Some(0) = self.confirm_qmc_points {
            return Err(CliError::schema("confirm_qmc_points", "must be positive"));
        }
        Ok(())
    }
}

fn nonempty_axis(axis: &Option<Axis>, path: &str) -> Result<(), CliError> {
    match axis {
        Some(a) if !a.values().is_empty() => Ok(()),
        Some(_) => Err(CliError::schema(path, "empty sweep")),
        None => Err(CliError::schema(path, "required")),
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads and parses a config file; parse errors carry the JSON field path.
pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(if path == "." { "(root)" } else { &path }, e.into_inner().to_string())
    })
}

/// One point of the outer sweep: the mixture at a given λ is built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub mixture: MixtureConfig,
}

impl Family {
    pub fn at(&self, lambda: f64) -> tanglebounds_core::Result<MixtureSpec> {
        match &self.mixture {
            MixtureConfig::TwoGaussians { dimension, ratio, alpha } => MixtureSpec::two_gaussians(*dimension, *ratio, lambda, *alpha),
            MixtureConfig::Equilateral => MixtureSpec::equilateral(lambda),
            MixtureConfig::Explicit { spec } => Ok(spec.clone()),
        }
    }

    /// (dimension, first component's ratio, alpha) for output rows.
    pub fn coordinates(&self) -> (usize, f64, f64) {
        match &self.mixture {
            MixtureConfig::TwoGaussians { dimension, ratio, alpha } => (*dimension, ratio.to_f64(), *alpha),
            MixtureConfig::Equilateral => (2, 1.0 / 3.0, 1.0),
            MixtureConfig::Explicit { spec } => (spec.dimension(), spec.ratios()[0], f64::NAN),
        }
    }
}

/// Expands ratio, alpha and dimension sweeps over the base family.
pub fn families(cfg: &ExperimentConfig) -> Vec<Family> {
    let base = cfg.mixture.clone().expect("validated");
    let MixtureConfig::TwoGaussians { dimension, ratio, alpha } = base else {
        return vec![Family { mixture: base }];
    };
    let s = &cfg.sweep;
    let dims = if s.dimension.is_empty() { vec![dimension] } else { s.dimension.clone() };
    let ratios = if s.ratio.is_empty() { vec![ratio] } else { s.ratio.clone() };
    let alphas = if s.alpha.is_empty() { vec![alpha] } else { s.alpha.clone() };
    let mut out = Vec::new();
    for &d in &dims {
        for &r in &ratios {
            for &a in &alphas {
                out.push(Family { mixture: MixtureConfig::TwoGaussians { dimension: d, ratio: r, alpha: a } });
            }
        }
    }
    out
}

/// The cut family of a mixture; `half_width` only matters for cubes.
pub fn cuts_for(cut: &CutConfig, spec: &MixtureSpec, half_width: f64) -> tanglebounds_core::Result<CutAssignment> {
    use tanglebounds_core::bounds::density_valley_cut;
    match cut {
        CutConfig::Valley => density_valley_cut(spec),
        CutConfig::Midpoint => CutAssignment::midpoint_halfspaces(spec),
        CutConfig::Voronoi => CutAssignment::voronoi(spec),
        CutConfig::Cubes => CutAssignment::cubes(spec, half_width),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simulate_cfg() -> &'static str {
        r#"{"mixture": {"family": "two_gaussians"}, "cut": {"kind": "valley"},
            "sweep": {"lambda": [5.0], "n": [100], "radius": {"from": 0.5, "to": 1.5, "steps": 3}},
            "trials": 10, "seed": 3}"#
    }

    #[test]
    fn range_axis_hits_both_ends() {
        let a = Axis::Range { from: 1.0, to: 2.0, steps: 5 };
        assert_eq!(a.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }

    #[test]
    fn missing_seed_names_the_field() {
        let mut cfg = parse(simulate_cfg()).unwrap();
        cfg.validate(CommandKind::Simulate).unwrap();
        cfg.seed = None;
        match cfg.validate(CommandKind::Simulate) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "seed"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_reports_its_path() {
        let text = r#"{"mixture": {"family": "two_gaussians", "alpah": 2}}"#;
        match parse(text) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "mixture"),
            other => panic!("{other:?}"),
        }
        match parse(r#"{"sweep": {"n": [1, "x"]}}"#) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "sweep.n[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_sweep_expands_families() {
        let mut cfg = parse(simulate_cfg()).unwrap();
        cfg.sweep.ratio = vec![Ratio::new(1, 4).unwrap(), Ratio::new(1, 2).unwrap()];
        cfg.sweep.alpha = vec![1.0, 2.0];
        assert_eq!(families(&cfg).len(), 4);
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = parse(simulate_cfg()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.seed = Some(4);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn shipped_configs_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let cfg = load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate(cfg.command.expect("shipped configs name their command")).unwrap();
            seen += 1;
        }
        assert!(seen >= 3);
    }
}
