//! Separation-probability sweeps over width, bias scale and depth.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::datasets::{self, DEFAULT_POINTS, DEFAULT_RADII, DEFAULT_SPHERE_DIM};
use crate::error::{Error, Result};
use crate::geometry::{load_csv, MulticlassDataset};
use crate::mc_verify::{wilson_interval, Z99};
use crate::rinn::{forward_all, lambda_hat, sample_layer, WeightDist};
use crate::seeding;
use crate::sep_check::{is_multiclass_separable, SolverOptions};

pub const DEFAULT_TRIALS: u64 = 200;
pub const DEFAULT_BUDGET: u64 = 100_000;
pub const SUCCESS_CRITERION: &str = "one-vs-rest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    #[serde(rename = "rings")]
    Rings2D,
    #[serde(rename = "spheres")]
    Spheres100D,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Depth {
    #[serde(rename = "one")]
    One,
    #[serde(rename = "two-hat")]
    TwoLambdaHat,
    #[serde(rename = "two-eq")]
    TwoLambdaEqual,
}

impl Depth {
    pub const ALL: [Depth; 3] = [Depth::One, Depth::TwoLambdaHat, Depth::TwoLambdaEqual];

    pub fn key(self) -> &'static str {
        match self {
            Depth::One => "one",
            Depth::TwoLambdaHat => "two-hat",
            Depth::TwoLambdaEqual => "two-eq",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Depth::One => "one-layer",
            Depth::TwoLambdaHat => "two-layer-λ̂",
            Depth::TwoLambdaEqual => "two-layer-λ",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "one" | "one-layer" => Ok(Depth::One),
            "two-hat" | "two" => Ok(Depth::TwoLambdaHat),
            "two-eq" => Ok(Depth::TwoLambdaEqual),
            other => Err(Error::InvalidConfig(format!("unknown depth {other:?} (one, two-hat, two-eq)"))),
        }
    }
}

fn default_points() -> usize {
    DEFAULT_POINTS
}
fn default_radii() -> Vec<f64> {
    DEFAULT_RADII.to_vec()
}
fn default_sphere_dim() -> usize {
    DEFAULT_SPHERE_DIM
}
fn default_trials() -> u64 {
    DEFAULT_TRIALS
}
fn default_budget() -> u64 {
    DEFAULT_BUDGET
}
fn default_true() -> bool {
    true
}
fn default_depths() -> Vec<Depth> {
    Depth::ALL.to_vec()
}
fn default_dist() -> WeightDist {
    WeightDist::GaussianRows
}

/// One sweep: every `(width, λ, depth)` cell gets `trials` independent initializations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    #[serde(default = "default_points")]
    pub points_per_class: usize,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_sphere_dim")]
    pub sphere_dim: usize,
    pub widths: Vec<usize>,
    /// Empty means the default grid for the dataset.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_depths")]
    pub depths: Vec<Depth>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub solver_budget: u64,
    /// Report max-margin separators instead of the first verified one.
    #[serde(default)]
    pub optimize_margin: bool,
    /// Scale layer outputs by `√(2/n)`.
    #[serde(default = "default_true")]
    pub normalized: bool,
    #[serde(default = "default_dist")]
    pub weight_dist: WeightDist,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetKind, widths: Vec<usize>, lambdas: Vec<f64>) -> Self {
        Self {
            dataset,
            points_per_class: DEFAULT_POINTS,
            radii: DEFAULT_RADII.to_vec(),
            sphere_dim: DEFAULT_SPHERE_DIM,
            widths,
            lambdas,
            trials: DEFAULT_TRIALS,
            depths: default_depths(),
            seed: 0,
            solver_budget: DEFAULT_BUDGET,
            optimize_margin: false,
            normalized: true,
            weight_dist: WeightDist::GaussianRows,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return bad(format!("widths must be non-empty and positive: {:?}", self.widths));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return bad(format!("lambdas must be positive and finite: {:?}", self.lambdas));
        }
        if self.depths.is_empty() {
            return bad("at least one depth is required".into());
        }
        if self.weight_dist == WeightDist::Explicit {
            return bad("explicit weights cannot be sampled".into());
        }
        Ok(())
    }

    /// Loads or generates the dataset; generated data uses a seed derived from `seed`.
    pub fn load_dataset(&self) -> Result<MulticlassDataset<f64>> {
        let data_seed = seeding::derive_seed(self.seed, &[u64::MAX]);
        match &self.dataset {
            DatasetKind::Rings2D => datasets::gen_rings(self.points_per_class, &self.radii, data_seed),
            DatasetKind::Spheres100D => datasets::gen_spheres(self.sphere_dim, self.points_per_class, &self.radii, data_seed),
            DatasetKind::File(p) => load_csv::<f64>(p)?.into_multiclass(),
        }
    }

    /// The configured λ values, or the default grid for `ds` when none are set.
    pub fn resolved_lambdas(&self, ds: &MulticlassDataset<f64>) -> Vec<f64> {
        if self.lambdas.is_empty() {
            default_lambda_grid(ds.radius(), ds.dim())
        } else {
            self.lambdas.clone()
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// 16 log-spaced values in `[R/16, 4R]` plus `3R√d`, sorted.
pub fn default_lambda_grid(radius: f64, d: usize) -> Vec<f64> {
    let (lo, hi) = (radius / 16.0, 4.0 * radius);
    let mut g: Vec<f64> = (0..16).map(|i| lo * (hi / lo).powf(i as f64 / 15.0)).collect();
    g.push(3.0 * radius * (d as f64).sqrt());
    g.sort_by(f64::total_cmp);
    g
}

/// Width grid used by the CLI when none is given.
pub fn default_widths(kind: &DatasetKind) -> Vec<usize> {
    match kind {
        DatasetKind::Spheres100D => vec![30, 60, 90, 120, 150, 200],
        _ => vec![5, 10, 15, 20, 30, 45, 60, 80, 100],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub width: usize,
    pub lambda: f64,
    pub depth: Depth,
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean over separated trials of the smallest one-vs-rest margin.
    pub mean_margin: Option<f64>,
    /// Trials whose solver returned an error (counted as failures).
    pub errors: u64,
}

impl SweepRow {
    pub fn stderr(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub threads: usize,
    pub thread_cap: Option<usize>,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            threads: seeding::with_pool(rayon::current_num_threads),
            thread_cap: seeding::thread_cap(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub lambdas: Vec<f64>,
    pub criterion: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, width: usize, lambda: f64, depth: Depth) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.width == width && r.lambda == lambda && r.depth == depth)
    }

    pub fn rows_for(&self, depth: Depth) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.depth == depth)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct CsvRow<'a> {
            width: usize,
            lambda: f64,
            depth: &'a str,
            successes: u64,
            trials: u64,
            p_hat: f64,
            ci_low: f64,
            ci_high: f64,
            mean_margin: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(CsvRow {
                width: r.width,
                lambda: r.lambda,
                depth: r.depth.key(),
                successes: r.successes,
                trials: r.trials,
                p_hat: r.p_hat,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                mean_margin: r.mean_margin,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON with the config echo and the current environment.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(flatten)]
            result: &'a SweepResult,
            environment: Environment,
        }
        Ok(serde_json::to_string_pretty(&Out {
            result: self,
            environment: Environment::current(),
        })?)
    }
}

#[derive(Clone, Copy)]
struct TrialOutcome {
    separated: bool,
    margin: f64,
    error: bool,
}

fn run_trial(
    classes: &[Vec<Vec<f64>>],
    cfg: &ExperimentConfig,
    radius: f64,
    width: usize,
    lambda: f64,
    depth: Depth,
    trial: u64,
) -> TrialOutcome {
    let opts = SolverOptions {
        budget: cfg.solver_budget,
        optimize_margin: cfg.optimize_margin,
        early_exit: true,
        ..SolverOptions::default()
    };
    let go = || -> Result<(bool, f64)> {
        let d = classes[0][0].len();
        let l1 = sample_layer::<f64>(d, width, lambda, cfg.weight_dist, cfg.normalized, seeding::derive_seed(cfg.seed, &[1, trial]))?;
        let mut feats: Vec<Vec<Vec<f64>>> = classes.iter().map(|c| forward_all(&l1, c)).collect::<Result<_>>()?;
        if depth != Depth::One {
            let lh = match depth {
                Depth::TwoLambdaHat => lambda_hat(radius, lambda),
                _ => lambda,
            };
            let l2 = sample_layer::<f64>(width, width, lh, cfg.weight_dist, cfg.normalized, seeding::derive_seed(cfg.seed, &[2, trial, width as u64]))?;
            feats = feats.iter().map(|c| forward_all(&l2, c)).collect::<Result<_>>()?;
        }
        let r = is_multiclass_separable(&feats, &opts)?;
        Ok((r.separable, r.min_margin().unwrap_or(f64::NAN)))
    };
    match go() {
        Ok((separated, margin)) => TrialOutcome {
            separated,
            margin,
            error: false,
        },
        Err(_) => TrialOutcome {
            separated: false,
            margin: f64::NAN,
            error: true,
        },
    }
}

/// Runs every cell of `cfg` in parallel.
///
/// Trial `t` uses the same first-layer seed in every cell, so cells are compared
/// on common random numbers and narrower layers are prefixes of wider ones.
pub fn separation_probability_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let ds = cfg.load_dataset()?;
    if ds.n_classes() < 2 {
        return Err(Error::InvalidConfig("sweeps need at least two classes".into()));
    }
    let lambdas = cfg.resolved_lambdas(&ds);
    let radius = ds.radius();
    let classes = ds.classes();
    let mut cells = Vec::new();
    for &w in &cfg.widths {
        for &l in &lambdas {
            for &dp in &cfg.depths {
                cells.push((w, l, dp));
            }
        }
    }
    let trials = cfg.trials;
    let outcomes: Vec<TrialOutcome> = seeding::with_pool(|| {
        (0..cells.len() as u64 * trials)
            .into_par_iter()
            .map(|u| {
                let (w, l, dp) = cells[(u / trials) as usize];
                run_trial(classes, cfg, radius, w, l, dp, u % trials)
            })
            .collect()
    });
    let rows = cells
        .iter()
        .zip(outcomes.chunks(trials as usize))
        .map(|(&(width, lambda, depth), outs)| {
            let successes = outs.iter().filter(|o| o.separated).count() as u64;
            let margins: Vec<f64> = outs.iter().filter(|o| o.separated).map(|o| o.margin).collect();
            let (ci_low, ci_high) = wilson_interval(successes, trials, Z99);
            SweepRow {
                width,
                lambda,
                depth,
                successes,
                trials,
                p_hat: successes as f64 / trials as f64,
                ci_low,
                ci_high,
                mean_margin: (!margins.is_empty()).then(|| margins.iter().sum::<f64>() / margins.len() as f64),
                errors: outs.iter().filter(|o| o.error).count() as u64,
            }
        })
        .collect();
    Ok(SweepResult {
        config: cfg.clone(),
        lambdas,
        criterion: SUCCESS_CRITERION.into(),
        rows,
    })
}

/// `(a − b) / √(se_a² + se_b²)`, with a floor on the joint error for degenerate rows.
pub fn joint_z(a: &SweepRow, b: &SweepRow) -> f64 {
    let se = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
    (a.p_hat - b.p_hat) / se.max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(widths: Vec<usize>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(DatasetKind::Rings2D, widths, vec![360.0]);
        c.points_per_class = 20;
        c.trials = 8;
        c
    }

    #[test]
    fn grid_shape() {
        let g = default_lambda_grid(360.0, 2);
        assert_eq!(g.len(), 17);
        assert!((g[0] - 22.5).abs() < 1e-9);
        assert!(g.contains(&1440.0) || g.iter().any(|v| (v - 1440.0).abs() < 1e-9));
        assert!(g.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn config_validation() {
        let mut c = small(vec![10]);
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = small(vec![]);
        assert!(c.validate().is_err());
        let c = ExperimentConfig::new(DatasetKind::Rings2D, vec![3], vec![-1.0]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let c = small(vec![10, 20]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), c);
        let minimal: ExperimentConfig = serde_json::from_str(r#"{"dataset":"rings","widths":[4]}"#).unwrap();
        assert_eq!(minimal.trials, DEFAULT_TRIALS);
        assert_eq!(minimal.depths.len(), 3);
        let file: ExperimentConfig = serde_json::from_str(r#"{"dataset":{"file":"x.csv"},"widths":[4]}"#).unwrap();
        assert_eq!(file.dataset, DatasetKind::File("x.csv".into()));
    }

    #[test]
    fn width_one_rarely_separates() {
        let r = separation_probability_sweep(&small(vec![1])).unwrap();
        assert!(r.rows.iter().all(|row| row.successes == 0));
    }

    #[test]
    fn rows_are_consistent_and_reproducible() {
        let c = small(vec![10, 40]);
        let a = separation_probability_sweep(&c).unwrap();
        let b = separation_probability_sweep(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * 3);
        for r in &a.rows {
            assert!(r.successes <= r.trials);
            assert_eq!(r.p_hat, r.successes as f64 / r.trials as f64);
            assert!(r.ci_low <= r.p_hat && r.p_hat <= r.ci_high);
        }
        let mut out = Vec::new();
        a.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), a.rows.len() + 1);
        assert!(text.starts_with("width,lambda,depth,successes,trials,p_hat,ci_low,ci_high,mean_margin"));
    }
}
