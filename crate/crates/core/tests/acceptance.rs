//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::time::{Duration, Instant};
use tanglebounds_core::bounds::{
    bound_small_n_delta, clique_region, density_valley_cut, family_threshold, min_separable_lambda_1d, optimize_radius, optimize_scalar,
    BoundOptions, CutAssignment, IncomparabilityReport, RadiusTarget, SeparabilityCondition, ThresholdKind, ThresholdOptions,
};
use tanglebounds_core::montecarlo::{
    empirical_moments_check, estimate_event_probability, estimate_incomparability, kappa_lemma_sweep, log_log_slope,
};
use tanglebounds_core::numeric::normal::std_cdf;
use tanglebounds_core::numeric::rng;
use tanglebounds_core::regions::{boundary_zone, measure_with, Method};
use tanglebounds_core::tangle_oracle::clique_suite;
use tanglebounds_core::{HiddenLabeling, MixtureSpec, NumericOptions, Ratio, Region, WeightModel, Which};

struct Outcome {
    pass: bool,
    detail: String,
}

fn half() -> Ratio {
    Ratio::new(1, 2).unwrap()
}

fn base(d: usize, lambda: f64) -> MixtureSpec {
    MixtureSpec::two_gaussians(d, half(), lambda, 1.0).unwrap()
}

fn delta_grid() -> Vec<f64> {
    (1..=30).map(|i| 0.1 * i as f64).collect()
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (cond, target) in [(SeparabilityCondition::TwoThirds, 2.948), (SeparabilityCondition::RootTwoThirds, 3.397)] {
        let t = Instant::now();
        let l = min_separable_lambda_1d(half(), 1.0, cond).unwrap();
        let el = t.elapsed();
        pass &= (l - target).abs() <= 0.005 && el < Duration::from_secs(1);
        parts.push(format!("{cond:?}: {l:.5} (target {target} ± 0.005, {el:.2?})"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let lambdas: Vec<f64> = (0..=50).map(|i| 3.0 + 0.1 * i as f64).collect();
    let opts = ThresholdOptions { tolerance: 1e-3, ..Default::default() };
    let r = family_threshold(
        |l| MixtureSpec::two_gaussians(1, half(), l, 1.0),
        density_valley_cut,
        ThresholdKind::LargeNWeight,
        |s, _| {
            let c = s.components()[1].mean[0] / 2.0;
            (1..=40).map(|i| c * i as f64 / 20.0).collect()
        },
        &lambdas,
        &opts,
    );
    let el = t.elapsed();
    match r {
        Ok(r) => Outcome {
            pass: (r.lambda - 4.27).abs() <= 0.03 && el < Duration::from_secs(30),
            detail: format!("λ* = {:.4} at Δ = {:.4} (target 4.27 ± 0.03, {el:.2?})", r.lambda, r.parameter),
        },
        Err(e) => Outcome { pass: false, detail: format!("{e}") },
    }
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let lambdas: Vec<f64> = (0..=12).map(|i| 3.0 + 0.25 * i as f64).collect();
    let opts = ThresholdOptions {
        bound: BoundOptions { numeric: NumericOptions { qmc_points: 1 << 18, ..Default::default() }, ..Default::default() },
        confirm: Some(NumericOptions { qmc_points: 1 << 22, ..Default::default() }),
        tolerance: 0.01,
    };
    let r = family_threshold(
        MixtureSpec::equilateral,
        CutAssignment::voronoi,
        ThresholdKind::LargeNDelta,
        |_, _| (2..=12).map(|i| 0.2 * i as f64).collect(),
        &lambdas,
        &opts,
    );
    let el = t.elapsed();
    match r {
        Ok(r) => Outcome {
            pass: (r.lambda - 4.1).abs() <= 0.1 && el < Duration::from_secs(300),
            detail: format!("λ* = {:.3} at δ = {:.3} (target 4.1 ± 0.1, {el:.2?})", r.lambda, r.parameter),
        },
        Err(e) => Outcome { pass: false, detail: format!("{e}") },
    }
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let trials = 10_000;
    let opts = BoundOptions::default();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut seed = 40;
    for d in [1usize, 2] {
        for lambda in [4.0, 5.0, 6.0] {
            for n in [400u64, 900] {
                seed += 1;
                let spec = base(d, lambda);
                let l = HiddenLabeling::canonical(&spec, n).unwrap();
                let s = Region::axis_halfspace(d, 0, lambda / 2.0);
                if let Ok((delta, report)) = optimize_radius(&spec, &l, 0, RadiusTarget::Delta { cut: &s }, &delta_grid(), &opts) {
                    let b = clique_region(&spec, 0, delta, opts.shape).unwrap();
                    let e = estimate_event_probability(&spec, &l, WeightModel::DeltaNeighborhood(delta), &b, &s, trials, seed).unwrap();
                    checked += 1;
                    if report.combined > e.estimate + 3.0 * e.se {
                        failures.push(format!(
                            "event d={d} λ={lambda} n={n}: bound {:.4} > {:.4} + 3·{:.4}",
                            report.combined, e.estimate, e.se
                        ));
                    }
                }
                let cuts = CutAssignment::midpoint_halfspaces(&spec).unwrap();
                let best = optimize_scalar(&delta_grid(), |dl| {
                    let r = IncomparabilityReport::evaluate(&spec, &l, &cuts, dl, &opts)?;
                    Ok((r.raw(), r))
                });
                if let Ok((delta, report)) = best {
                    let cliques: Vec<Region> = (0..2).map(|k| clique_region(&spec, k, delta, opts.shape).unwrap()).collect();
                    let e =
                        estimate_incomparability(&spec, &l, WeightModel::DeltaNeighborhood(delta), &cliques, &cuts, trials, seed + 1000)
                            .unwrap();
                    checked += 1;
                    let e = e.overall;
                    if report.combined > e.estimate + 3.0 * e.se {
                        failures
                            .push(format!("pair d={d} λ={lambda} n={n}: bound {:.4} > {:.4} + 3·{:.4}", report.combined, e.estimate, e.se));
                    }
                }
            }
        }
    }
    let el = t.elapsed();
    Outcome {
        pass: failures.is_empty() && checked > 0 && el < Duration::from_secs(1200),
        detail: format!("{checked} bounds with passing preconditions checked, {} violations {failures:?} ({el:.2?})", failures.len()),
    }
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let r = clique_suite(200, 2024).unwrap();
    let el = t.elapsed();
    Outcome {
        pass: r.failures.is_empty() && el < Duration::from_secs(60),
        detail: format!("{}/{} planted-clique families satisfy the axioms ({el:.2?})", r.cases - r.failures.len(), r.cases),
    }
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let r = kappa_lemma_sweep(100_000, 6).unwrap();
    let el = t.elapsed();
    Outcome {
        pass: r.zone_violations == 0 && r.kernel_violations == 0 && el < Duration::from_secs(120),
        detail: format!("{} instances, {} zone and {} kernel violations ({el:.2?})", r.instances, r.zone_violations, r.kernel_violations),
    }
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let spec = base(1, 5.0);
    let s = Region::axis_halfspace(1, 0, 2.5);
    let model = WeightModel::DeltaNeighborhood(1.0);
    let zone = boundary_zone(&s, 1.0).unwrap();
    let numeric = NumericOptions::default();
    let l = HiddenLabeling::canonical(&spec, 200).unwrap();
    let c = empirical_moments_check(&spec, &l, &zone, &s, model, 100_000, 70, &numeric).unwrap();
    let zs: Vec<(String, f64)> =
        ["mean_size", "var_size", "pair_probability"].iter().map(|q| (q.to_string(), c.row(q).map_or(f64::INFINITY, |r| r.z))).collect();
    let z_ok = zs.iter().all(|(_, z)| z.abs() <= 4.0);
    let ns = [250.0, 500.0, 1000.0, 2000.0];
    let mut sq = Vec::new();
    let mut kv = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let l = HiddenLabeling::canonical(&spec, n as u64).unwrap();
        let c = empirical_moments_check(&spec, &l, &zone, &s, model, 4000, 71 + i as u64, &numeric).unwrap();
        sq.push(c.var_size_squared);
        kv.push(c.var_kappa);
    }
    let (a, b) = (log_log_slope(&ns, &sq), log_log_slope(&ns, &kv));
    let el = t.elapsed();
    Outcome {
        pass: z_ok && a <= 3.2 && b <= 3.2 && el < Duration::from_secs(300),
        detail: format!(
            "z {:?}; slopes Var|V_A|² {a:.3}, Var κ {b:.3} ({el:.2?})",
            zs.iter().map(|(q, z)| format!("{q}={z:.2}")).collect::<Vec<_>>()
        ),
    }
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let spec = base(1, 5.0);
    let s = Region::axis_halfspace(1, 0, 2.5);
    let opts = BoundOptions::default();
    let mut parts = Vec::new();
    let mut order = Vec::new();
    for n in [100u64, 10_000] {
        let l = HiddenLabeling::canonical(&spec, n).unwrap();
        let best = |pick: fn(&tanglebounds_core::bounds::BoundReport) -> f64| {
            optimize_scalar(&delta_grid(), |d| {
                let r = bound_small_n_delta(&spec, &l, 0, d, &s, &opts)?;
                Ok((pick(&r), ()))
            })
            .map(|(d, _)| pick(&bound_small_n_delta(&spec, &l, 0, d, &s, &opts).unwrap()))
        };
        let h = best(|r| r.hoeffding).unwrap();
        let be = best(|r| r.berry_esseen).unwrap();
        parts.push(format!("n={n}: hoeffding {h:.4}, berry-esseen {be:.4}"));
        order.push(be > h);
    }
    let el = t.elapsed();
    Outcome { pass: order == [true, false] && el < Duration::from_secs(10), detail: format!("{} ({el:.2?})", parts.join("; ")) }
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let numeric = NumericOptions::default();
    let mut worst: f64 = 0.0;
    let spec2 = MixtureSpec::two_gaussians(2, Ratio::new(1, 3).unwrap(), 3.0, 1.5).unwrap();
    for (normal, offset) in [(vec![1.0, 0.0], 0.7), (vec![0.6, 0.8], -1.1), (vec![-1.0, 2.0], 2.5)] {
        let h = Region::halfspace(normal.clone(), offset).unwrap();
        let Region::Halfspace { normal: u, offset: c } = &h else { unreachable!() };
        for k in 0..2 {
            let comp = &spec2.components()[k];
            let m: f64 = u.iter().zip(&comp.mean).map(|(a, b)| a * b).sum();
            let exact = std_cdf((c - m) / comp.stddev);
            worst = worst.max((measure_with(&spec2, &h, Which::Component(k), &numeric).unwrap().value - exact).abs());
        }
    }
    let spec3 = MixtureSpec::two_gaussians(3, half(), 2.0, 0.7).unwrap();
    let bx = Region::Box { lo: vec![-0.5, -1.0, 0.2], hi: vec![1.5, 0.3, 2.0] };
    for k in 0..2 {
        let comp = &spec3.components()[k];
        let exact: f64 = (0..3)
            .map(|j| {
                let (a, b) = ((bx_lo(&bx)[j] - comp.mean[j]) / comp.stddev, (bx_hi(&bx)[j] - comp.mean[j]) / comp.stddev);
                std_cdf(b) - std_cdf(a)
            })
            .product();
        worst = worst.max((measure_with(&spec3, &bx, Which::Component(k), &numeric).unwrap().value - exact).abs());
    }
    let closed_ok = worst <= 1e-10;

    let ball = Region::Ball { center: vec![1.2, 0.4], radius: 1.3 };
    let q = measure_with(&spec2, &ball, Which::Mean, &numeric).unwrap();
    let mut r = rng::stream(909, 0);
    let samples = 1 << 22;
    let mut hits = 0u64;
    let ratios = spec2.ratios();
    for _ in 0..samples {
        let k = if rng::uniform_open(&mut r) < ratios[0] { 0 } else { 1 };
        let c = &spec2.components()[k];
        let x = [c.mean[0] + c.stddev * rng::std_normal(&mut r), c.mean[1] + c.stddev * rng::std_normal(&mut r)];
        hits += ball.contains(&x).unwrap() as u64;
    }
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    let ball_ok = q.method == Method::Quadrature && (q.value - p).abs() <= 4.0 * se;
    let el = t.elapsed();
    Outcome {
        pass: closed_ok && ball_ok && el < Duration::from_secs(30),
        detail: format!("max closed-form deviation {worst:.2e}; 2D ball quadrature {:.6} vs sampled {p:.6} ± {se:.1e} ({el:.2?})", q.value),
    }
}

fn bx_lo(r: &Region) -> &[f64] {
    match r {
        Region::Box { lo, .. } => lo,
        _ => unreachable!(),
    }
}

fn bx_hi(r: &Region) -> &[f64] {
    match r {
        Region::Box { hi, .. } => hi,
        _ => unreachable!(),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1D density thresholds", criterion_1),
        ("kernel-graph threshold", criterion_2),
        ("equilateral Voronoi threshold", criterion_3),
        ("bound soundness against simulation", criterion_4),
        ("clique tangle oracle", criterion_5),
        ("κ lemmas", criterion_6),
        ("moment formulas", criterion_7),
        ("Hoeffding / Berry–Esseen crossover", criterion_8),
        ("measure accuracy", criterion_9),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if filter.as_ref().is_some_and(|f| *f != id) {
            continue;
        }
        let o = run();
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as i32;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
