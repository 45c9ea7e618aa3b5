//! Built-in configurations for each figure panel.

use crate::config::{Axis, CommandKind, Condition, CutConfig, ExperimentConfig, GraphModel, MixtureConfig, SweepConfig, FIGURES};
use crate::error::CliError;
use tanglebounds_core::bounds::CliqueShape;
use tanglebounds_core::{NumericOptions, Ratio};

fn ratio(p: u64, q: u64) -> Ratio {
    Ratio::new(p, q).expect("preset ratios are valid")
}

fn range(from: f64, to: f64, steps: usize) -> Option<Axis> {
    Some(Axis::Range { from, to, steps })
}

fn two(dimension: usize) -> Option<MixtureConfig> {
    Some(MixtureConfig::TwoGaussians { dimension, ratio: ratio(1, 2), alpha: 1.0 })
}

fn qmc(points: usize) -> Option<NumericOptions> {
    Some(NumericOptions { qmc_points: points, ..NumericOptions::default() })
}

pub fn preset(figure: &str) -> Result<ExperimentConfig, CliError> {
    let mut c = ExperimentConfig::empty();
    c.figure = Some(figure.to_string());
    c.output = Some(figure.to_string());
    let delta_grid = range(0.05, 3.0, 60);
    let lambda_1d = range(1.0, 8.0, 29);
    match figure {
        "fig2a" => {
            c.command = Some(CommandKind::Bound);
            c.mixture = two(1);
            c.cut = Some(CutConfig::Valley);
            c.sweep = SweepConfig { lambda: lambda_1d, n: vec![100, 300, 900, 3000, 10_000], radius: delta_grid, ..SweepConfig::default() };
        }
        "fig2b" => {
            c.command = Some(CommandKind::Bound);
            c.mixture = two(1);
            c.cut = Some(CutConfig::Valley);
            c.sweep = SweepConfig {
                lambda: lambda_1d,
                n: vec![900],
                radius: delta_grid,
                ratio: vec![ratio(1, 10), ratio(1, 5), ratio(1, 3), ratio(1, 2)],
                ..SweepConfig::default()
            };
        }
        "fig2c" => {
            c.command = Some(CommandKind::Threshold);
            c.mixture = two(1);
            c.conditions = vec![Condition::TwoThirds, Condition::RootTwoThirds];
            c.sweep = SweepConfig { ratio: (1..20).map(|k| ratio(k, 20)).collect(), ..SweepConfig::default() };
        }
        "fig2d" => {
            c.command = Some(CommandKind::Threshold);
            c.mixture = two(1);
            c.conditions = vec![Condition::TwoThirds, Condition::RootTwoThirds];
            c.sweep = SweepConfig { alpha: (1..=16).map(|k| 0.25 * k as f64).collect(), ..SweepConfig::default() };
        }
        "fig4a" | "fig4b" => {
            c.command = Some(CommandKind::Bound);
            c.mixture = two(if figure == "fig4a" { 2 } else { 3 });
            c.cut = Some(CutConfig::Midpoint);
            c.numeric = qmc(1 << 16);
            c.sweep = SweepConfig {
                lambda: range(1.0, 8.0, 15),
                n: vec![100, 900, 10_000],
                radius: range(0.1, 3.0, 30),
                ..SweepConfig::default()
            };
        }
        "fig4c" => {
            // both the large-n and the finite-n preconditions, one curve each
            c.command = Some(CommandKind::Threshold);
            c.mixture = two(1);
            c.cut = Some(CutConfig::Midpoint);
            c.clique_shape = CliqueShape::Cube;
            c.conditions = vec![Condition::LargeNDelta, Condition::SmallNDelta];
            c.sweep = SweepConfig {
                lambda: range(0.5, 16.0, 32),
                radius: range(0.1, 5.0, 50),
                dimension: (1..=8).collect(),
                ..SweepConfig::default()
            };
        }
        "fig4d" => {
            c.command = Some(CommandKind::Bound);
            c.mixture = Some(MixtureConfig::Equilateral);
            c.cut = Some(CutConfig::Cubes);
            c.numeric = qmc(1 << 14);
            c.sweep = SweepConfig {
                lambda: range(2.0, 10.0, 17),
                n: vec![300, 900, 3000],
                radius: range(0.2, 3.0, 15),
                half_width: range(0.5, 6.0, 12),
                ..SweepConfig::default()
            };
        }
        "fig5a" => {
            c.command = Some(CommandKind::Threshold);
            c.mixture = two(1);
            c.graph = GraphModel::Kernel;
            c.cut = Some(CutConfig::Valley);
            c.conditions = vec![Condition::LargeNWeight];
            c.sweep =
                SweepConfig { lambda: range(2.0, 10.0, 17), radius: range(0.2, 4.0, 20), radius_per_row: true, ..SweepConfig::default() };
        }
        "fig5b" => {
            c.command = Some(CommandKind::Bound);
            c.mixture = two(1);
            c.graph = GraphModel::Kernel;
            c.cut = Some(CutConfig::Valley);
            c.sweep = SweepConfig { lambda: lambda_1d, n: vec![100, 300, 900, 3000, 10_000], radius: delta_grid, ..SweepConfig::default() };
        }
        other => {
            return Err(CliError::schema("figure", format!("unknown figure `{other}`, expected one of {}", FIGURES.join(", "))));
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for f in FIGURES {
            let c = preset(f).unwrap();
            c.validate(c.command.unwrap()).unwrap_or_else(|e| panic!("{f}: {e}"));
        }
        assert!(preset("fig3").is_err());
    }
}
