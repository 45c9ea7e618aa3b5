//! Command implementations: each turns a validated config into a table.

use crate::config::{cuts_for, families, CutConfig, ExperimentConfig, GraphModel};
use crate::error::CliError;
use crate::table::{Cell, Table};
use log::info;
use tanglebounds_core::bounds::{
    clique_region, family_threshold, incomparability_bound, min_separable_lambda_1d, optimize_incomparability_delta, optimize_radius,
    BoundOptions, BoundReport, CutAssignment, EventBound, RadiusTarget, Side, ThresholdOptions,
};
use tanglebounds_core::montecarlo::{
    empirical_moments_check, estimate_incomparability, kappa_lemma_sweep, EstimateReport, IncomparabilityEstimate,
};
use tanglebounds_core::regions::boundary_zone;
use tanglebounds_core::tangle_oracle::clique_suite;
use tanglebounds_core::{Error, HiddenLabeling, MixtureSpec, NumericOptions, Region, WeightModel};

/// How to draw a table: x column, y columns, and the columns that split series.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x: &'static str,
    pub y: Vec<&'static str>,
    pub group: Vec<&'static str>,
    /// Only rows whose `event` column equals this.
    pub event: Option<&'static str>,
}

pub struct Outcome {
    pub table: Table,
    pub plot: Option<Plot>,
    /// Reported after the outputs are written.
    pub failure: Option<CliError>,
}

fn varying(values: &[bool], names: &[&'static str]) -> Vec<&'static str> {
    names.iter().zip(values).filter(|(_, v)| **v).map(|(n, _)| *n).collect()
}

fn lambdas(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.sweep.lambda.as_ref().map_or_else(|| vec![f64::NAN], |a| a.values())
}

fn radius_sets(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    let grid = cfg.sweep.radius.as_ref().map(|a| a.values()).unwrap_or_default();
    if cfg.sweep.radius_per_row {
        grid.into_iter().map(|r| vec![r]).collect()
    } else {
        vec![grid]
    }
}

pub fn threshold(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut table = Table::new(vec!["dimension", "r", "alpha", "condition", "radius_grid", "lambda_star", "parameter", "slack", "status"]);
    let opts = ThresholdOptions {
        bound: cfg.bound_options(),
        confirm: cfg.confirm_qmc_points.map(|q| NumericOptions { qmc_points: q, ..cfg.bound_options().numeric }),
        ..ThresholdOptions::default()
    };
    let lambda_grid = lambdas(cfg);
    let fams = families(cfg);
    let (mut rows, mut infeasible) = (0, 0);
    for fam in &fams {
        let (d, r, alpha) = fam.coordinates();
        for &cond in &cfg.conditions {
            let coords = || vec![Cell::from(d), Cell::from(r), Cell::from(alpha), Cell::from(cond.name())];
            if let Some(sep) = cond.separability() {
                let crate::config::MixtureConfig::TwoGaussians { dimension: 1, ratio, alpha } = fam.mixture else {
                    return Err(CliError::schema("conditions", format!("{} needs two Gaussians on the line", cond.name())));
                };
                let lambda = min_separable_lambda_1d(ratio, alpha, sep)?;
                info!("{} r={r} alpha={alpha}: λ* = {lambda}", cond.name());
                let mut row = coords();
                row.extend([Cell::Empty, lambda.into(), Cell::Empty, Cell::Empty, "ok".into()]);
                table.push(row);
                rows += 1;
                continue;
            }
            let kind = cond.family_kind().expect("family condition");
            let cut = cfg.cut.as_ref().expect("validated");
            for set in radius_sets(cfg) {
                let label = if set.len() == 1 { Cell::Num(set[0]) } else { Cell::Empty };
                let res = family_threshold(|l| fam.at(l), |s| cuts_for(cut, s, f64::NAN), kind, |_, _| set.clone(), &lambda_grid, &opts);
                let mut row = coords();
                row.push(label);
                rows += 1;
                match res {
                    Ok(t) => {
                        info!("{} d={d} r={r} alpha={alpha}: λ* = {} at {}", cond.name(), t.lambda, t.parameter);
                        row.extend([t.lambda.into(), t.parameter.into(), t.slack.into(), "ok".into()]);
                    }
                    Err(Error::NotFound(msg)) => {
                        info!("{} d={d} r={r} alpha={alpha}: {msg}", cond.name());
                        infeasible += 1;
                        row.extend([f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), "infeasible".into()]);
                    }
                    Err(e) => return Err(e.into()),
                }
                table.push(row);
            }
        }
    }
    let s = &cfg.sweep;
    let x = if s.radius_per_row {
        "radius_grid"
    } else if s.dimension.len() > 1 {
        "dimension"
    } else if s.alpha.len() > 1 {
        "alpha"
    } else {
        "r"
    };
    let group = varying(&[cfg.conditions.len() > 1, s.dimension.len() > 1 && x != "dimension"], &["condition", "dimension"]);
    let failure = (rows > 0 && infeasible == rows).then(|| CliError::Infeasible("no λ on the grid satisfies the conditions".into()));
    Ok(Outcome {
        table,
        plot: Some(Plot { title: "smallest separable mean distance".into(), x, y: vec!["lambda_star"], group, event: None }),
        failure,
    })
}

const BOUND_COLUMNS: [&str; 15] = [
    "dimension",
    "r",
    "alpha",
    "lambda",
    "n",
    "half_width",
    "event",
    "radius",
    "precondition_slack",
    "hoeffding_branch",
    "berry_esseen_branch",
    "size_correction",
    "combined",
    "order_floor",
    "status",
];

/// Per-event reports, the union bound, and what the simulation needs to replay it.
struct PointBound {
    half_width: f64,
    events: Vec<EventBound>,
    union: f64,
    cuts: CutAssignment,
    model: WeightModel,
    cliques: Vec<Region>,
}

fn report_cells(r: &BoundReport) -> [Cell; 6] {
    let slack = r.preconditions.iter().map(|p| p.slack).fold(f64::NAN, f64::min);
    [slack.into(), r.hoeffding.into(), r.berry_esseen.into(), r.size_correction.into(), r.combined.into(), r.order_floor.into()]
}

fn delta_point(
    spec: &MixtureSpec,
    l: &HiddenLabeling,
    cfg: &ExperimentConfig,
    grid: &[f64],
    opts: &BoundOptions,
) -> Result<Option<PointBound>, CliError> {
    let cut = cfg.cut.as_ref().expect("validated");
    let widths = match (cut, &cfg.sweep.half_width) {
        (CutConfig::Cubes, Some(a)) => a.values(),
        _ => vec![f64::NAN],
    };
    let mut best: Option<PointBound> = None;
    let mut best_raw = f64::NEG_INFINITY;
    for hw in widths {
        let cuts = cuts_for(cut, spec, hw)?;
        match optimize_incomparability_delta(spec, l, &cuts, grid, opts) {
            Ok((delta, report)) => {
                if report.raw() > best_raw {
                    best_raw = report.raw();
                    let cliques = (0..spec.len()).map(|k| clique_region(spec, k, delta, opts.shape)).collect::<Result<_, _>>()?;
                    best = Some(PointBound {
                        half_width: hw,
                        union: report.combined,
                        events: report.events,
                        cuts,
                        model: WeightModel::DeltaNeighborhood(delta),
                        cliques,
                    });
                }
            }
            Err(Error::NotFound(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(best)
}

fn kernel_point(
    spec: &MixtureSpec,
    l: &HiddenLabeling,
    cfg: &ExperimentConfig,
    grid: &[f64],
    opts: &BoundOptions,
) -> Result<Option<PointBound>, CliError> {
    if spec.dimension() != 1 || spec.len() != 2 {
        return Err(CliError::schema("graph", "kernel bounds need two Gaussians on the line"));
    }
    let sigma = spec.common_stddev().ok_or_else(|| CliError::Infeasible("kernel bounds need one common standard deviation".into()))?;
    let cuts = cuts_for(cfg.cut.as_ref().expect("validated"), spec, f64::NAN)?;
    let Region::Halfspace { normal, offset } = cuts.cut(0, 1)? else {
        return Err(CliError::schema("cut.kind", "kernel bounds need a threshold cut"));
    };
    let c = offset / normal[0];
    let first = if normal[0] > 0.0 { Side::Below } else { Side::Above };
    let second = if first == Side::Below { Side::Above } else { Side::Below };
    let mut events = Vec::new();
    let mut cliques = Vec::new();
    for (k, other, side) in [(0, 1, first), (1, 0, second)] {
        match optimize_radius(spec, l, k, RadiusTarget::Weight { cut_point: c, side }, grid, opts) {
            Ok((width, report)) => {
                cliques.push(Region::Ball { center: spec.component(k)?.mean.clone(), radius: width / 2.0 });
                events.push(EventBound { clique: k, other, report });
            }
            Err(Error::NotFound(_)) => return Ok(None),
            Err(e) => return Err(e.into()),
        }
    }
    let union = incomparability_bound(&events, &cuts)?;
    Ok(Some(PointBound { half_width: f64::NAN, events, union, cuts, model: WeightModel::GaussianKernel(sigma), cliques }))
}

fn estimate_cells(e: &EstimateReport) -> [Cell; 4] {
    [e.estimate.into(), e.wilson_lo.into(), e.wilson_hi.into(), e.trials.into()]
}

/// `bound`, and `simulate` when `simulate` is set.
pub fn bound(cfg: &ExperimentConfig, simulate: bool) -> Result<Outcome, CliError> {
    let mut columns = BOUND_COLUMNS.to_vec();
    if simulate {
        columns.extend(["estimate", "wilson_lo", "wilson_hi", "trials"]);
    }
    let mut table = Table::new(columns);
    let opts = cfg.bound_options();
    let lambda_grid = lambdas(cfg);
    let fams = families(cfg);
    let (mut points, mut infeasible) = (0u64, 0u64);
    for fam in &fams {
        let (d, r, alpha) = fam.coordinates();
        for &lambda in &lambda_grid {
            let spec = fam.at(lambda)?;
            for &n in &cfg.sweep.n {
                let l = HiddenLabeling::canonical(&spec, n).map_err(|e| match e {
                    Error::Incompatible { .. } => CliError::schema("sweep.n", e.to_string()),
                    e => e.into(),
                })?;
                for set in radius_sets(cfg) {
                    points += 1;
                    let coords = |hw: f64, event: String| -> Vec<Cell> {
                        vec![d.into(), r.into(), alpha.into(), lambda.into(), n.into(), hw.into(), event.into()]
                    };
                    let point = match cfg.graph {
                        GraphModel::Delta => delta_point(&spec, &l, cfg, &set, &opts)?,
                        GraphModel::Kernel => kernel_point(&spec, &l, cfg, &set, &opts)?,
                    };
                    let Some(p) = point else {
                        infeasible += 1;
                        info!("d={d} r={r} alpha={alpha} λ={lambda} n={n}: no feasible radius");
                        let mut row = coords(f64::NAN, "all".into());
                        row.extend([f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into()]);
                        row.extend([Cell::Num(0.0), f64::NAN.into(), "infeasible".into()]);
                        if simulate {
                            row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                        }
                        table.push(row);
                        continue;
                    };
                    info!("d={d} r={r} alpha={alpha} λ={lambda} n={n}: union bound {}", p.union);
                    let est: Option<IncomparabilityEstimate> = if simulate {
                        let trials = cfg.trials.expect("validated");
                        let seed = cfg.seed.expect("validated").wrapping_add(points - 1);
                        Some(estimate_incomparability(&spec, &l, p.model, &p.cliques, &p.cuts, trials, seed)?)
                    } else {
                        None
                    };
                    for e in &p.events {
                        let mut row = coords(p.half_width, format!("{}>{}", e.clique, e.other));
                        row.push(e.report.parameter.into());
                        row.extend(report_cells(&e.report));
                        row.push("ok".into());
                        if let Some(est) = &est {
                            let hit = est.events.iter().find(|(a, b, _)| *a == e.clique && *b == e.other);
                            match hit {
                                Some((_, _, r)) => row.extend(estimate_cells(r)),
                                None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
                            }
                        }
                        table.push(row);
                    }
                    let mut row = coords(p.half_width, "all".into());
                    let common = match p.model {
                        WeightModel::DeltaNeighborhood(delta) => delta,
                        WeightModel::GaussianKernel(_) => f64::NAN,
                    };
                    row.extend([
                        common.into(),
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                        p.union.into(),
                        Cell::Empty,
                        "ok".into(),
                    ]);
                    if let Some(est) = &est {
                        row.extend(estimate_cells(&est.overall));
                    }
                    table.push(row);
                }
            }
        }
    }
    let s = &cfg.sweep;
    let x = if lambda_grid.len() > 1 { "lambda" } else { "n" };
    let group = varying(
        &[s.n.len() > 1 && x != "n", s.ratio.len() > 1, s.alpha.len() > 1, s.dimension.len() > 1, s.radius_per_row],
        &["n", "r", "alpha", "dimension", "radius"],
    );
    let y = if simulate { vec!["combined", "estimate"] } else { vec!["combined"] };
    let failure = (points > 0 && infeasible == points).then(|| CliError::Infeasible("no sweep point has a feasible radius".into()));
    Ok(Outcome { table, plot: Some(Plot { title: "incomparability probability bound".into(), x, y, group, event: Some("all") }), failure })
}

pub const VERIFY_SEED: u64 = 2024;
pub const VERIFY_TRIALS: u64 = 20_000;

/// Oracle suite, κ-lemma sweep and moment checks.
pub fn verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let seed = cfg.seed.unwrap_or(VERIFY_SEED);
    let trials = cfg.trials.unwrap_or(VERIFY_TRIALS);
    let mut table = Table::new(vec!["check", "cases", "violations", "statistic", "pass"]);
    let mut failed = Vec::new();

    let suite = clique_suite(200, seed)?;
    let ok = suite.failures.is_empty();
    info!("tangle oracle: {} of {} cases failed", suite.failures.len(), suite.cases);
    table.push(vec!["tangle_oracle".into(), suite.cases.into(), suite.failures.len().into(), Cell::Empty, ok.to_string().into()]);
    if !ok {
        failed.push(format!("tangle oracle {:?}", suite.failures));
    }

    let sweep = kappa_lemma_sweep(10_000, seed)?;
    let v = sweep.zone_violations + sweep.kernel_violations;
    info!("κ lemmas: {v} violations over {} instances", sweep.instances);
    table.push(vec!["kappa_lemmas".into(), sweep.instances.into(), v.into(), Cell::Empty, (v == 0).to_string().into()]);
    if v > 0 {
        failed.push(format!("{v} κ-lemma violations"));
    }

    let spec = MixtureSpec::two_gaussians(1, tanglebounds_core::Ratio::new(1, 2)?, 5.0, 1.0)?;
    let s = Region::axis_halfspace(1, 0, 2.5);
    let zone = boundary_zone(&s, 1.0)?;
    let l = HiddenLabeling::canonical(&spec, 200)?;
    let m = empirical_moments_check(&spec, &l, &zone, &s, WeightModel::DeltaNeighborhood(1.0), trials, seed, &NumericOptions::default())?;
    let z = m.max_abs_z();
    info!("moments: max |z| = {z}");
    let ok = z <= 4.0;
    table.push(vec!["moment_formulas".into(), trials.into(), u64::from(!ok).into(), z.into(), ok.to_string().into()]);
    if !ok {
        failed.push(format!("moment z-score {z}"));
    }

    let failure = (!failed.is_empty()).then(|| CliError::Violation(failed.join("; ")));
    Ok(Outcome { table, plot: None, failure })
}
