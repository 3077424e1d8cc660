use proptest::prelude::*;

use relusep::bounds;
use relusep::cover;
use relusep::detnet::{self, VerifyMode};
use relusep::geometry::{norm_order, reorder, LabeledDataset};
use relusep::mc_verify::{wilson_interval, Z99};
use relusep::rinn::{self, WeightDist};
use relusep::scalar::vecops;
use relusep::sep_check::{self, exact2d, SolverOptions};

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, d)
}

fn dataset() -> impl Strategy<Value = LabeledDataset<f64>> {
    (2usize..5).prop_flat_map(|d| {
        (prop::collection::vec(point(d), 1..10), prop::collection::vec(point(d), 1..10))
            .prop_filter_map("classes must not share a point", |(p, n)| LabeledDataset::new(p, n).ok())
    })
}

fn planar() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let pt = (-3i32..=3, -3i32..=3).prop_map(|(a, b)| vec![a as f64, b as f64]);
    (prop::collection::vec(pt.clone(), 1..6), prop::collection::vec(pt, 1..6))
        .prop_filter("disjoint classes", |(p, n)| p.iter().all(|x| !n.contains(x)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_order_is_descending_and_stable(ds in dataset()) {
        let o = norm_order(&ds);
        prop_assert_eq!(o.len(), ds.n_total());
        for w in o.entries.windows(2) {
            prop_assert!(vecops::norm_sq(&w[0].point) >= vecops::norm_sq(&w[1].point));
        }
        prop_assert_eq!(reorder(&o), o);
    }

    #[test]
    fn delta_and_radius_match_scan(ds in dataset()) {
        let mut delta = f64::INFINITY;
        for p in ds.points_pos() {
            for q in ds.points_neg() {
                delta = delta.min(vecops::dist(p, q));
            }
        }
        prop_assert_eq!(ds.delta(), delta);
        let r = ds.points_pos().iter().chain(ds.points_neg()).map(|x| vecops::norm(x)).fold(0.0, f64::max);
        prop_assert_eq!(ds.radius(), r);
    }

    #[test]
    fn deterministic_layer_invariant_and_margin(ds in dataset()) {
        let gamma = bounds::gamma_finite(ds.delta(), ds.radius(), ds.dim()).unwrap();
        let layer = detnet::build_deterministic_layer(&ds, gamma).unwrap();
        prop_assert!(layer.check_invariant().is_ok());
        let cert = detnet::build_separating_weights(&layer, &ds).unwrap();
        prop_assert!(cert.is_valid());
        let rep = detnet::verify_separation(&layer, &cert, &ds, VerifyMode::Finite).unwrap();
        prop_assert!(rep.passed, "{:?}", rep);
    }

    #[test]
    fn deterministic_layer_in_f32(ds in dataset()) {
        let ds32: LabeledDataset<f32> = match ds.convert() { Ok(d) => d, Err(_) => return Ok(()) };
        prop_assume!(ds32.delta() > 1e-2);
        let gamma = bounds::gamma_finite(ds32.delta(), ds32.radius(), ds32.dim()).unwrap();
        let layer = detnet::build_deterministic_layer(&ds32, gamma).unwrap();
        prop_assert!(layer.check_invariant().is_ok());
    }

    #[test]
    fn cover_always_verifies(ds in dataset(), log_mu in -3.0..6.0f64) {
        let c = cover::build_mutual_cover(&ds, 10f64.powf(log_mu)).unwrap();
        let rep = cover::verify_mutual_cover(&c, &ds);
        prop_assert!(rep.passed, "{:?}", rep.violations);
        prop_assert!(c.n_cover() <= ds.n_total());
    }

    #[test]
    fn cover_pipeline_separates(ds in dataset()) {
        let gamma = cover::default_gamma(&ds).unwrap();
        let run = cover::cover_pipeline(&ds, gamma).unwrap();
        prop_assert!(run.cover_report.passed);
        prop_assert!(run.cover.max_radius() <= gamma / 2.0 + 1e-12);
        prop_assert!(run.verification.passed, "{:?}", run.verification);
    }

    #[test]
    fn planted_separator_is_found(
        w in prop::collection::vec(-1.0..1.0f64, 3),
        pts in prop::collection::vec(point(3), 4..30),
    ) {
        prop_assume!(vecops::norm(&w) > 0.1);
        let (pos, neg): (Vec<Vec<f64>>, Vec<Vec<f64>>) = pts.into_iter().filter(|x| vecops::dot(&w, x).abs() > 0.05).partition(|x| vecops::dot(&w, x) > 0.0);
        prop_assume!(!pos.is_empty() && !neg.is_empty());
        let r = sep_check::max_margin_separator(&pos, &neg, 100_000).unwrap();
        prop_assert!(r.is_separated());
        let s = sep_check::slacks(&pos, &neg, &r.weights, r.offset);
        prop_assert!(s.iter().all(|&v| v > 0.0));
        if let Some(ub) = r.margin_upper_bound {
            prop_assert!(r.margin <= ub * (1.0 + 1e-6));
        }
    }

    #[test]
    fn lp_agrees_with_exact_planar_search((pos, neg) in planar()) {
        let exact = exact2d::separate(&pos, &neg).is_some();
        let opts = SolverOptions { exact_fallback: false, optimize_margin: false, ..SolverOptions::default() };
        let r = sep_check::max_margin_separator_with(&pos, &neg, &opts).unwrap();
        prop_assert_eq!(r.is_separated(), exact);
    }

    #[test]
    fn width_bound_meets_failure_budget(p in 1e-4..0.5f64, n in 1usize..500, eta in 0.01..0.9f64) {
        let w = bounds::required_width(p, n, eta).unwrap();
        prop_assert!((n as f64) * (1.0 - p).powf(w as f64) <= eta * (1.0 + 1e-9));
    }

    #[test]
    fn node_probability_decreases_in_lambda(delta in 0.1..1.9f64, l in 1.0..10.0f64, d in 2usize..8) {
        let a = bounds::node_success_p(delta, 1.0, d, l).unwrap();
        let b = bounds::node_success_p(delta, 1.0, d, 2.0 * l).unwrap();
        prop_assert!((a / b - 2.0).abs() < 1e-9);
    }

    #[test]
    fn layer_prefixes_nest(seed in any::<u64>(), n in 1usize..40) {
        let wide = rinn::sample_layer::<f64>(3, 40, 2.0, WeightDist::GaussianRows, false, seed).unwrap();
        let narrow = rinn::sample_layer::<f64>(3, n, 2.0, WeightDist::GaussianRows, false, seed).unwrap();
        prop_assert_eq!(narrow.weights(), &wide.weights()[..3 * n]);
        prop_assert_eq!(narrow.bias(), &wide.bias()[..n]);
    }

    #[test]
    fn relu_outputs_are_nonnegative(seed in any::<u64>(), x in point(4)) {
        let l = rinn::sample_layer::<f64>(4, 25, 3.0, WeightDist::GaussianRows, true, seed).unwrap();
        prop_assert!(rinn::forward(&l, &x).unwrap().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn wilson_brackets_and_narrows(s in 0u64..100, extra in 0u64..100) {
        let n = s + extra + 1;
        let (lo, hi) = wilson_interval(s, n, Z99);
        let p = s as f64 / n as f64;
        prop_assert!(lo <= p && p <= hi);
        let (lo4, hi4) = wilson_interval(4 * s, 4 * n, Z99);
        prop_assert!(hi4 - lo4 <= hi - lo + 1e-12);
    }
}
