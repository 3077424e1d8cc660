use std::fs;

use relusep::experiments::{
    emit_plots, gen_rings, separation_probability_sweep, theorem_width_audit, AuditCase, AuditOptions, DatasetKind,
    Depth, ExperimentConfig, PlotKind,
};
use relusep::geometry::LabeledDataset;
use relusep::mc_verify::{
    cap_measure, cap_probability_check, chi_interval_check, estimate_event_probability, matrix_deviation_check,
    EventCase, EventParams,
};
use relusep::{bounds, Error};

fn small_sweep(trials: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(DatasetKind::Rings2D, vec![10, 40], vec![150.0, 360.0]);
    cfg.points_per_class = 12;
    cfg.trials = trials;
    cfg.seed = 11;
    cfg
}

fn pair_dataset() -> LabeledDataset<f64> {
    LabeledDataset::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![-1.0, 0.0], vec![0.2, -0.9]]).unwrap()
}

#[test]
fn cap_measure_matches_closed_form_in_three_dimensions() {
    for r in [0.1, 0.5, 1.0, 1.7] {
        let exact = r * r / 4.0;
        assert!((cap_measure(3, r).unwrap() - exact).abs() < 1e-9, "r = {r}");
    }
}

#[test]
fn cap_estimate_brackets_exact_measure() {
    let exact = cap_measure(10, 0.5).unwrap();
    let est = cap_probability_check(10, 0.5, 2_000_000, 5).unwrap();
    assert!(est.ci_low <= exact && exact <= est.ci_high, "{exact} vs {est:?}");
    assert!(exact >= est.theoretical_bound);
}

#[test]
fn chi_interval_matches_two_dimensional_closed_form() {
    let exact = (-0.5f64).exp() - (-9.0f64).exp();
    let est = chi_interval_check(2, 400_000, 9).unwrap();
    assert!(est.ci_low <= exact && exact <= est.ci_high, "{exact} vs {est:?}");
}

#[test]
fn gaussian_event_dominates_tenth_of_sphere_event() {
    let ds = pair_dataset();
    let (gamma, lambda) = {
        let r = ds.radius();
        (bounds::gamma_finite(ds.delta(), r, 2).unwrap(), 3.0 * r * 2f64.sqrt())
    };
    let mut params = EventParams::new(EventCase::SphereUniform, 400_000, 3);
    params.gamma = Some(gamma);
    params.lambda = Some(lambda);
    let sphere = estimate_event_probability(&ds, 0, &params).unwrap();
    params.case = EventCase::GaussianD;
    let gauss = estimate_event_probability(&ds, 0, &params).unwrap();
    assert!(sphere.consistent_with_bound() && gauss.consistent_with_bound());
    assert!(gauss.p_hat >= 0.1 * sphere.p_hat - 3.0 * (gauss.stderr + 0.1 * sphere.stderr));
}

#[test]
fn case_three_requires_k() {
    let params = EventParams::new(EventCase::GaussianK, 10, 0);
    assert!(matches!(
        estimate_event_probability(&pair_dataset(), 0, &params),
        Err(Error::InvalidCaseParameters(_))
    ));
}

#[test]
fn deviation_probability_grows_with_k() {
    let ds = pair_dataset();
    let ps: Vec<f64> = [4u64, 16, 64, 256]
        .iter()
        .map(|&k| matrix_deviation_check(&ds, k, 4000, Some(0.2), 21).unwrap().estimate.p_hat)
        .collect();
    for w in ps.windows(2) {
        assert!(w[1] >= w[0] - 0.03, "{ps:?}");
    }
    assert!(ps[3] > ps[0] + 0.2, "{ps:?}");
}

#[test]
fn sweep_is_reproducible_and_thread_independent() {
    let cfg = small_sweep(16);
    let a = separation_probability_sweep(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| separation_probability_sweep(&cfg).unwrap());
    assert_eq!(a.rows, b.rows);
}

#[test]
fn sweep_csv_has_one_row_per_cell() {
    let cfg = small_sweep(4);
    let res = separation_probability_sweep(&cfg).unwrap();
    let mut buf = Vec::new();
    res.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "width,lambda,depth,successes,trials,p_hat,ci_low,ci_high,mean_margin");
    assert_eq!(lines.len(), 1 + 2 * 2 * Depth::ALL.len());
    let json: serde_json::Value = serde_json::from_str(&res.to_json().unwrap()).unwrap();
    assert!(json.get("environment").is_some());
}

#[test]
fn plot_has_three_series_and_companion_csv() {
    let mut cfg = small_sweep(4);
    cfg.widths = vec![20];
    let res = separation_probability_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("p.svg");
    let csv_path = emit_plots(&res, PlotKind::VsLambda, &svg_path).unwrap();
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.trim_start().starts_with("<svg") || svg.trim_start().starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 3);
    for d in Depth::ALL {
        let label = d.label().replace('<', "&lt;").replace('>', "&gt;");
        assert!(svg.contains(&label), "{label}");
    }
    assert_eq!(csv_path, dir.path().join("p.csv"));
    assert_eq!(fs::read_to_string(csv_path).unwrap().lines().count(), 1 + Depth::ALL.len() * 2);
}

#[test]
fn rings_audit_refuses_astronomical_width() {
    let ds = gen_rings(100, &[120.0, 240.0, 360.0], 0).unwrap().one_vs_rest(0).unwrap();
    let r = theorem_width_audit(&ds, 0.05, AuditCase::I, &AuditOptions::default());
    assert!(matches!(r, Err(Error::WidthTooLarge { .. })), "{r:?}");
}
