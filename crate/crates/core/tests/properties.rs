use proptest::prelude::*;
use tanglebounds_core::bounds::{bound_from_measures, size_at_least_two_from, CutAssignment, ZoneMeasures};
use tanglebounds_core::graph::{build_graph, edge_connectivity};
use tanglebounds_core::mixture::{compatible_counts, sample_dataset};
use tanglebounds_core::montecarlo::cut_weight;
use tanglebounds_core::regions::{boundary_zone, measure};
use tanglebounds_core::tangle_oracle::{incomparable, materialize_clique_tangle, planted_clique_graph, verify_tangle_axioms};
use tanglebounds_core::{Dataset, HiddenLabeling, MixtureSpec, Ratio, Region, WeightModel, Which};

fn points(d: usize, n: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec(-4.0f64..4.0, n * d).prop_map(move |v| Dataset::from_columns(d, v, 0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_probability_in_unit_interval_and_monotone(nu in 0.0f64..0.99, n in 1u64..400) {
        let a = size_at_least_two_from(&[n], &[nu]).unwrap();
        let b = size_at_least_two_from(&[n + 1], &[nu]).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn combined_bound_never_exceeds_branches(a in 0.0f64..0.2, b in 0.0f64..0.6, ab in 0.0f64..1.0, n in 2u64..5000) {
        let ab = ab * a.min(b);
        let m = ZoneMeasures { zone: vec![a], clique: vec![b], overlap: vec![ab] };
        if let Ok(r) = bound_from_measures(1.0, &[n], &m, 0.1) {
            prop_assert!(r.combined <= r.hoeffding.max(r.berry_esseen).max(0.0));
            prop_assert!((0.0..=1.0).contains(&r.combined));
            prop_assert!(r.preconditions.iter().all(|p| p.holds));
            prop_assert!(r.hoeffding <= 1.0 && r.berry_esseen <= 1.0);
        }
    }

    #[test]
    fn hoeffding_nondecreasing_in_n(a in 0.0f64..0.05, b in 0.1f64..0.5) {
        let m = ZoneMeasures { zone: vec![a], clique: vec![b], overlap: vec![0.0] };
        let hs: Vec<f64> = [100u64, 400, 900, 1600].iter().map(|&n| bound_from_measures(1.0, &[n], &m, 0.1).unwrap().hoeffding).collect();
        prop_assert!(hs.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn complements_sum_to_one(cx in -2.0f64..2.0, cy in -2.0f64..2.0, r in 0.1f64..3.0, ux in -1.0f64..1.0, off in -2.0f64..2.0) {
        let spec = MixtureSpec::two_gaussians(2, Ratio::new(1, 3).unwrap(), 2.5, 0.8).unwrap();
        let regions = [
            Region::Ball { center: vec![cx, cy], radius: r },
            Region::cube(&[cx, cy], r),
            Region::halfspace(vec![ux, 1.0], off).unwrap(),
        ];
        for reg in regions {
            let inside = measure(&spec, &reg, Which::Mean).unwrap().value;
            let outside = measure(&spec, &reg.clone().complement(), Which::Mean).unwrap().value;
            prop_assert!((inside + outside - 1.0).abs() < 1e-8, "{reg:?}: {inside} + {outside}");
        }
    }

    #[test]
    fn zone_holds_points_close_to_both_sides(x in -3.0f64..3.0, y in -3.0f64..3.0, delta in 0.05f64..1.5) {
        let s = Region::Ball { center: vec![0.0, 0.0], radius: 1.5 };
        let zone = boundary_zone(&s, delta).unwrap();
        let p = [x, y];
        let near_in = s.dist_to(&p).unwrap() <= delta;
        let near_out = s.dist_to_complement(&p).unwrap() <= delta;
        prop_assert_eq!(zone.contains(&p).unwrap(), near_in && near_out);
    }

    #[test]
    fn voronoi_cell_is_nearest_site(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let spec = MixtureSpec::equilateral(4.0).unwrap();
        let sites: Vec<Vec<f64>> = spec.components().iter().map(|c| c.mean.clone()).collect();
        let d: Vec<f64> = sites.iter().map(|s| (s[0] - x).powi(2) + (s[1] - y).powi(2)).collect();
        let nearest = (0..3).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        let cell = Region::Voronoi { site: nearest, sites };
        prop_assert!(cell.contains(&[x, y]).unwrap());
    }

    #[test]
    fn cut_complement_structural(l in 1.0f64..8.0) {
        let spec = MixtureSpec::equilateral(l).unwrap();
        for cuts in [CutAssignment::voronoi(&spec).unwrap(), CutAssignment::cubes(&spec, l / 3.0).unwrap(), CutAssignment::midpoint_halfspaces(&spec).unwrap()] {
            for (a, b) in cuts.events() {
                prop_assert_eq!(cuts.cut(b, a).unwrap(), cuts.cut(a, b).unwrap().complement());
            }
        }
    }

    #[test]
    fn counts_match_ratios(step in 1u64..50) {
        let spec = MixtureSpec::equilateral(3.0).unwrap();
        let n = 3 * step;
        let counts = compatible_counts(&spec, n).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        prop_assert!(counts.iter().all(|&c| c == step));
    }

    #[test]
    fn fast_kappa_equals_graph_kappa(data in points(2, 40), delta in 0.1f64..2.0, off in -2.0f64..2.0) {
        let inside: Vec<bool> = data.columns().map(|x| x[0] - 0.5 * x[1] <= off).collect();
        let s: Vec<usize> = (0..data.n()).filter(|&i| inside[i]).collect();
        for model in [WeightModel::DeltaNeighborhood(delta), WeightModel::GaussianKernel(delta)] {
            let exact = edge_connectivity(&build_graph(&data, model).unwrap(), &s).unwrap();
            prop_assert!((cut_weight(&data, &inside, model) - exact).abs() <= 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn majority_monotone_in_cut_point(seed in 0u64..1000, c1 in 0.0f64..3.0, extra in 0.0f64..3.0) {
        let spec = MixtureSpec::two_gaussians(1, Ratio::new(1, 2).unwrap(), 5.0, 1.0).unwrap();
        let l = HiddenLabeling::canonical(&spec, 60).unwrap();
        let data = sample_dataset(&spec, &l, seed).unwrap();
        let clique: Vec<f64> = data.raw().iter().copied().filter(|x| x.abs() <= 0.6).collect();
        let majority = |c: f64| {
            let inside = clique.iter().filter(|&&x| x <= c).count();
            inside > clique.len() - inside
        };
        if majority(c1) {
            prop_assert!(majority(c1 + extra));
        }
    }

    #[test]
    fn clique_families_are_tangles_and_incomparability_is_symmetric(seed in 0u64..10_000, n in 4usize..9) {
        let g = planted_clique_graph(n, &[0, 1], seed).unwrap();
        let t1 = materialize_clique_tangle(&g, &[0, 1]).unwrap();
        prop_assert_eq!(verify_tangle_axioms(&g, &t1).unwrap(), None);
        if let Ok(t2) = materialize_clique_tangle(&g, &[n - 2, n - 1]) {
            prop_assert_eq!(incomparable(&t1, &t2).unwrap().is_some(), incomparable(&t2, &t1).unwrap().is_some());
        }
        prop_assert!(incomparable(&t1, &t1).unwrap().is_none());
    }

    #[test]
    fn ratio_text_roundtrip(p in 1u64..1000, q in 1u64..1000) {
        let r = Ratio::new(p, q).unwrap();
        let back: Ratio = r.to_string().parse().unwrap();
        prop_assert_eq!(r, back);
    }
}
