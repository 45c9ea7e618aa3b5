use tanglebounds_core::bounds::{
    best_family_slack, bound_small_n_delta, clique_region, density_valley_cut, optimize_incomparability_delta, optimize_radius,
    BoundOptions, CliqueShape, CutAssignment, RadiusTarget, Side, ThresholdKind, ThresholdOptions,
};
use tanglebounds_core::montecarlo::{estimate_event_probability, estimate_incomparability};
use tanglebounds_core::{HiddenLabeling, MixtureSpec, NumericOptions, Ratio, Region, WeightModel};

fn two_on_line(l: f64) -> MixtureSpec {
    MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), l, 1.0).unwrap()
}

#[test]
fn delta_bound_stays_below_simulated_frequency() {
    let spec = two_on_line(6.0);
    let labeling = HiddenLabeling::canonical(&spec, 300).unwrap();
    let cut = Region::halfspace(vec![1.0], 3.0).unwrap();
    let opts = BoundOptions::default();
    let grid: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
    let (delta, report) = optimize_radius(&spec, &labeling, 0, RadiusTarget::Delta { cut: &cut }, &grid, &opts).unwrap();
    let clique = clique_region(&spec, 0, delta, opts.shape).unwrap();
    let est = estimate_event_probability(&spec, &labeling, WeightModel::DeltaNeighborhood(delta), &clique, &cut, 400, 11).unwrap();
    assert!(report.combined > 0.0);
    assert!(report.combined <= est.estimate + 3.0 * est.se.max(1e-3), "bound {} vs frequency {}", report.combined, est.estimate);
}

#[test]
fn kernel_bound_stays_below_simulated_frequency() {
    let spec = two_on_line(6.0);
    let labeling = HiddenLabeling::canonical(&spec, 200).unwrap();
    let opts = BoundOptions::default();
    let grid: Vec<f64> = (1..=40).map(|i| 0.05 * i as f64).collect();
    let target = RadiusTarget::Weight { cut_point: 3.0, side: Side::Below };
    let (delta, report) = optimize_radius(&spec, &labeling, 0, target, &grid, &opts).unwrap();
    let clique = Region::Ball { center: vec![0.0], radius: delta / 2.0 };
    let cut = Region::halfspace(vec![1.0], 3.0).unwrap();
    let est = estimate_event_probability(&spec, &labeling, WeightModel::GaussianKernel(1.0), &clique, &cut, 200, 5).unwrap();
    assert!(report.combined <= est.estimate + 3.0 * est.se.max(1e-3), "bound {} vs frequency {}", report.combined, est.estimate);
}

#[test]
fn union_bound_matches_its_events() {
    let spec = MixtureSpec::equilateral(8.0).unwrap();
    let labeling = HiddenLabeling::canonical(&spec, 900).unwrap();
    let cuts = CutAssignment::voronoi(&spec).unwrap();
    let numeric = NumericOptions { qmc_points: 1 << 14, ..NumericOptions::default() };
    let opts = BoundOptions { shape: CliqueShape::Ball, numeric, ..BoundOptions::default() };
    let grid = [1.0, 1.5, 2.0];
    let (delta, report) = optimize_incomparability_delta(&spec, &labeling, &cuts, &grid, &opts).unwrap();
    assert_eq!(report.events.len(), 6);
    let failures: f64 = report.events.iter().map(|e| 1.0 - e.report.combined).sum();
    assert!((report.combined - (1.0 - failures).max(0.0)).abs() < 1e-12);
    for e in &report.events {
        let again = bound_small_n_delta(&spec, &labeling, e.clique, delta, &cuts.cut(e.clique, e.other).unwrap(), &opts).unwrap();
        assert_eq!(again.combined, e.report.combined);
    }
}

#[test]
fn well_separated_triangle_yields_incomparable_tangles() {
    let spec = MixtureSpec::equilateral(12.0).unwrap();
    let labeling = HiddenLabeling::canonical(&spec, 300).unwrap();
    let cuts = CutAssignment::voronoi(&spec).unwrap();
    let cliques: Vec<Region> = (0..3).map(|k| clique_region(&spec, k, 1.5, CliqueShape::Ball).unwrap()).collect();
    let est = estimate_incomparability(&spec, &labeling, WeightModel::DeltaNeighborhood(1.5), &cliques, &cuts, 100, 3).unwrap();
    assert!(est.overall.estimate > 0.95, "{}", est.overall.estimate);
    assert_eq!(est.events.len(), 6);
}

#[test]
fn weight_family_is_feasible_only_at_moderate_radius() {
    // too small a clique has no mass, too large a clique pays too much in the order scale
    let spec = two_on_line(6.0);
    let cuts = density_valley_cut(&spec).unwrap();
    let opts = ThresholdOptions::default();
    let slack = |d: f64| best_family_slack(&spec, &cuts, ThresholdKind::LargeNWeight, &[d], &opts).unwrap().1;
    let (low, mid, high) = (slack(0.05), slack(1.3), slack(5.0));
    assert!(mid > 0.0);
    assert!(mid > low && mid > high);
}

#[test]
fn spec_round_trips_through_json() {
    let spec = MixtureSpec::equilateral(4.5).unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    let back: MixtureSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(spec, back);
}
