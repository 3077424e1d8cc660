use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use relusep::bounds::{self, BoundsOptions, LambdaChoice};
use relusep::cover;
use relusep::detnet::{self, FallbackOptions, VerifyMode};
use relusep::experiments::audit::{self, AuditCase, AuditOptions};
use relusep::experiments::plot::{emit_plots, PlotKind};
use relusep::experiments::sweep::{self, DatasetKind, Depth, ExperimentConfig};
use relusep::geometry::{load_csv, DatasetFile};
use relusep::mc_verify::{self, EventCase, EventParams};
use relusep::sep_check::{self, SolverOptions};
use relusep::Dataset;

#[derive(Parser)]
#[command(name = "relu-sep", version, about = "Separation capacity of random and deterministic ReLU layers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Width, margin and node-probability bounds for a two-class CSV.
    Bounds(BoundsArgs),
    /// Deterministic separating layer plus output weights.
    Detsep(DetsepArgs),
    /// Mutual cover and the layer built on its centers.
    Cover(CoverArgs),
    /// Linear separability of a CSV (binary or one-vs-rest).
    Sepcheck(SepcheckArgs),
    /// Monte Carlo checks of the probabilistic lemmas.
    #[command(name = "mc-verify", subcommand)]
    McVerify(McCmd),
    /// Separation-probability sweep over width, λ and depth.
    Experiment(ExperimentArgs),
    /// Runs a random layer at the width the theorem prescribes.
    Audit(AuditArgs),
}

#[derive(Args)]
struct BoundsArgs {
    csv: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Bias scale for all three cases (defaults to each case's minimum).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "c", default_value_t = 1.0)]
    c_const: f64,
    #[arg(long, default_value_t = 10_000)]
    width_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DetsepArgs {
    csv: PathBuf,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Always sample hyperplanes instead of constructing them.
    #[arg(long)]
    force_rejection: bool,
}

#[derive(Args)]
struct CoverArgs {
    csv: PathBuf,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct SepcheckArgs {
    csv: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Stop at the first verified separator instead of maximizing the margin.
    #[arg(long)]
    no_optimize: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    I,
    Ii,
    Iii,
}

#[derive(Subcommand)]
enum McCmd {
    /// Per-node event probability for point `index` of the norm ordering.
    Event {
        csv: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_enum, default_value = "i")]
        case: CaseArg,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spherical cap probability `P(‖e₁ − v‖ ≤ r)`.
    Cap {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// `P(1 ≤ ρ ≤ 3√d)` for `ρ² ∼ χ²_d`.
    Chi {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Matrix deviation event over the difference-union set.
    Mdi {
        csv: PathBuf,
        #[arg(long, default_value_t = 16)]
        k: u64,
        #[arg(long)]
        theta: Option<f64>,
        /// Search for the smallest k reaching 8/9, up to this value.
        #[arg(long)]
        calibrate: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Rings,
    Spheres,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    Auto,
    VsLambda,
    VsWidth,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    dataset: Option<DatasetArg>,
    /// CSV path when the dataset is `file`.
    path: Option<PathBuf>,
    /// JSON config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    widths: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    /// Comma-separated subset of one, two-hat, two-eq.
    #[arg(long, value_delimiter = ',')]
    depth: Vec<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    optimize_margin: bool,
    #[arg(long, value_enum, default_value = "auto")]
    plot: PlotArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    /// Two-class CSV, or `clusters` for the built-in antipodal instance.
    dataset: String,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, value_enum, default_value = "i")]
    case: CaseArg,
    #[arg(long, default_value_t = 16)]
    k: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = audit::DEFAULT_WIDTH_CAP)]
    cap: u64,
}

fn binary(path: &PathBuf) -> Result<Dataset> {
    let file = load_csv::<f64>(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(file.into_binary()?)
}

fn print<S: serde::Serialize + ?Sized>(v: &S) -> Result<()> {
    use std::io::Write;
    writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn default_gamma(ds: &Dataset, gamma: Option<f64>) -> Result<f64> {
    match gamma {
        Some(g) => Ok(g),
        None => Ok(cover::default_gamma(ds)?),
    }
}

fn run_bounds(a: BoundsArgs) -> Result<()> {
    let ds = binary(&a.csv)?;
    let opts = BoundsOptions {
        eta: a.eta,
        lambda: a.lambda.map(LambdaChoice::all).unwrap_or_default(),
        c_const: a.c_const,
        width_samples: a.width_samples,
        seed: a.seed,
    };
    print(&bounds::bounds_report(&ds, &opts)?)
}

fn run_detsep(a: DetsepArgs) -> Result<()> {
    let ds = binary(&a.csv)?;
    let gamma = default_gamma(&ds, a.gamma)?;
    let mut opts = FallbackOptions::for_dataset(&ds, a.seed);
    opts.force_rejection = a.force_rejection;
    let layer = detnet::build_deterministic_layer_with(&ds, gamma, &opts)?;
    let cert = detnet::build_separating_weights(&layer, &ds)?;
    let report = detnet::verify_separation(&layer, &cert, &ds, VerifyMode::Finite)?;
    print(&json!({
        "gamma": gamma,
        "width": layer.width(),
        "hyperplanes": layer.hyperplanes,
        "certificate": cert,
        "verification": report,
    }))
}

fn run_cover(a: CoverArgs) -> Result<()> {
    let ds = binary(&a.csv)?;
    let gamma = default_gamma(&ds, a.gamma)?;
    let run = cover::cover_pipeline(&ds, gamma)?;
    print(&json!({
        "gamma": gamma,
        "mu": run.cover.mu,
        "cover": run.cover,
        "cover_report": run.cover_report,
        "hyperplanes": run.layer.hyperplanes,
        "certificate": run.certificate,
        "verification": run.verification,
    }))
}

fn run_sepcheck(a: SepcheckArgs) -> Result<()> {
    let opts = SolverOptions {
        budget: a.budget,
        optimize_margin: !a.no_optimize,
        ..SolverOptions::default()
    };
    match load_csv::<f64>(&a.csv).with_context(|| format!("reading {}", a.csv.display()))? {
        DatasetFile::Binary(ds) => print(&sep_check::max_margin_separator_with(ds.points_pos(), ds.points_neg(), &opts)?),
        DatasetFile::Multiclass(ds) => print(&sep_check::is_multiclass_separable(ds.classes(), &opts)?),
    }
}

fn run_mc(cmd: McCmd) -> Result<()> {
    match cmd {
        McCmd::Event { csv, index, case, k, gamma, lambda, trials, seed } => {
            let ds = binary(&csv)?;
            let case = match case {
                CaseArg::I => EventCase::SphereUniform,
                CaseArg::Ii => EventCase::GaussianD,
                CaseArg::Iii => EventCase::GaussianK,
            };
            let params = EventParams {
                case,
                gamma,
                lambda,
                k,
                trials,
                seed,
            };
            let est = mc_verify::estimate_event_probability(&ds, index, &params)?;
            print(&json!({ "estimate": est, "consistent_with_bound": est.consistent_with_bound() }))
        }
        McCmd::Cap { d, r, trials, seed } => {
            let est = mc_verify::cap_probability_check(d, r, trials, seed)?;
            print(&json!({
                "estimate": est,
                "exact": mc_verify::cap_measure(d, r)?,
                "consistent_with_bound": est.consistent_with_bound(),
            }))
        }
        McCmd::Chi { d, trials, seed } => {
            let est = mc_verify::chi_interval_check(d, trials, seed)?;
            print(&json!({ "estimate": est, "consistent_with_bound": est.consistent_with_bound() }))
        }
        McCmd::Mdi { csv, k, theta, calibrate, trials, seed } => {
            let ds = binary(&csv)?;
            match calibrate {
                Some(k_max) => print(&mc_verify::calibrate_k(&ds, k_max, trials, theta, 10_000, seed)?),
                None => print(&mc_verify::matrix_deviation_check(&ds, k, trials, theta, seed)?),
            }
        }
    }
}

fn run_experiment(a: ExperimentArgs) -> Result<()> {
    let kind = match (a.dataset, &a.path) {
        (Some(DatasetArg::Rings), _) => Some(DatasetKind::Rings2D),
        (Some(DatasetArg::Spheres), _) => Some(DatasetKind::Spheres100D),
        (Some(DatasetArg::File), Some(p)) => Some(DatasetKind::File(p.clone())),
        (Some(DatasetArg::File), None) => bail!("`experiment file` needs a CSV path"),
        (None, _) => None,
    };
    let mut cfg = match (&a.config, kind) {
        (Some(path), kind) => {
            let mut c = ExperimentConfig::from_json_file(path).with_context(|| format!("reading {}", path.display()))?;
            if let Some(k) = kind {
                c.dataset = k;
            }
            c
        }
        (None, Some(k)) => ExperimentConfig::new(k.clone(), sweep::default_widths(&k), Vec::new()),
        (None, None) => bail!("give a dataset (rings, spheres, file <path>) or --config"),
    };
    if !a.widths.is_empty() {
        cfg.widths = a.widths;
    }
    if !a.lambdas.is_empty() {
        cfg.lambdas = a.lambdas;
    }
    if !a.depth.is_empty() {
        cfg.depths = a.depth.iter().map(|s| Depth::parse(s)).collect::<relusep::Result<_>>()?;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(b) = a.budget {
        cfg.solver_budget = b;
    }
    cfg.optimize_margin |= a.optimize_margin;
    cfg.validate()?;

    let result = sweep::separation_probability_sweep(&cfg)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let csv_path = a.out.join("sweep.csv");
    result.write_csv(std::fs::File::create(&csv_path)?)?;
    std::fs::write(a.out.join("sweep.json"), result.to_json()?)?;
    let kind = match a.plot {
        PlotArg::VsLambda => PlotKind::VsLambda,
        PlotArg::VsWidth => PlotKind::VsWidth,
        PlotArg::Auto if result.lambdas.len() > 1 && cfg.widths.len() == 1 => PlotKind::VsLambda,
        PlotArg::Auto => PlotKind::VsWidth,
    };
    emit_plots(&result, kind, a.out.join("plot.svg"))?;
    for r in &result.rows {
        eprintln!(
            "n={:<5} λ={:<10.3} {:<8} {}/{}  p̂={:.3} [{:.3}, {:.3}]",
            r.width,
            r.lambda,
            r.depth.key(),
            r.successes,
            r.trials,
            r.p_hat,
            r.ci_low,
            r.ci_high
        );
    }
    println!("{}", a.out.display());
    Ok(())
}

fn run_audit(a: AuditArgs) -> Result<()> {
    let ds = if a.dataset == "clusters" {
        audit::antipodal_clusters(5, 0.9, a.seed)?
    } else {
        binary(&PathBuf::from(&a.dataset))?
    };
    let case = match a.case {
        CaseArg::I => AuditCase::I,
        CaseArg::Ii => AuditCase::Ii,
        CaseArg::Iii => AuditCase::Iii { k: a.k },
    };
    let opts = AuditOptions {
        trials: a.trials,
        seed: a.seed,
        width_cap: a.cap,
        ..AuditOptions::default()
    };
    match audit::theorem_width_audit(&ds, a.eta, case, &opts) {
        Ok(r) => print(&r),
        Err(relusep::Error::WidthTooLarge { width, cap }) => {
            let plan = audit::width_plan(&ds, a.eta, case)?;
            print(&json!({ "refused": true, "width": width, "cap": cap, "plan": plan }))
        }
        Err(e) => Err(e.into()),
    }
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Bounds(a) => run_bounds(a),
        Cmd::Detsep(a) => run_detsep(a),
        Cmd::Cover(a) => run_cover(a),
        Cmd::Sepcheck(a) => run_sepcheck(a),
        Cmd::McVerify(c) => run_mc(c),
        Cmd::Experiment(a) => run_experiment(a),
        Cmd::Audit(a) => run_audit(a),
    }
}
