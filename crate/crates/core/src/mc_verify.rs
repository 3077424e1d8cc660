//! Monte Carlo checks of the probabilistic lemmas: per-node event probabilities,
//! spherical caps, chi-square intervals and matrix deviation.
//!
//! Every estimator splits its trials into fixed chunks with derived seeds and
//! reduces an integer success count, so results do not depend on thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::geometry::{norm_order, LabeledDataset};
use crate::scalar::{vecops, Scalar};
use crate::seeding;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Target probability of the matrix deviation event.
pub const MDI_TARGET: f64 = 8.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCase {
    /// Normals uniform on the sphere.
    SphereUniform,
    /// Standard Gaussian normals, bound `p/10`.
    GaussianD,
    /// Standard Gaussian normals, bound `q` at embedding dimension `k`.
    GaussianK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub case: Option<EventCase>,
    pub p_hat: f64,
    pub successes: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub stderr: f64,
    pub theoretical_bound: f64,
    pub seed: u64,
}

impl EventEstimate {
    fn from_counts(case: Option<EventCase>, successes: u64, trials: u64, bound: f64, seed: u64) -> Self {
        let p_hat = successes as f64 / trials as f64;
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z99);
        Self {
            case,
            p_hat,
            successes,
            trials,
            ci_low,
            ci_high,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            theoretical_bound: bound,
            seed,
        }
    }

    /// Whether the upper confidence limit reaches the theoretical lower bound.
    pub fn consistent_with_bound(&self) -> bool {
        self.ci_high >= self.theoretical_bound
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    (lo, hi)
}

fn count_successes(trials: u64, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
    seeding::with_pool(|| {
        seeding::chunks(trials)
            .into_par_iter()
            .map(|(c, len)| {
                let mut rng = seeding::derived_rng(seed, &[c]);
                (0..len).filter(|_| f(&mut rng)).count() as u64
            })
            .sum()
    })
}

fn gaussian_into(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

fn sphere_into(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    loop {
        gaussian_into(rng, out);
        let n = vecops::norm(out);
        if n > 0.0 {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::Range("trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Parameters of one per-node event estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub case: EventCase,
    /// Slack; defaults to the case's maximum.
    pub gamma: Option<f64>,
    /// Bias scale; defaults to the case's minimum.
    pub lambda: Option<f64>,
    /// Embedding dimension, required for [`EventCase::GaussianK`].
    pub k: Option<u64>,
    pub trials: u64,
    pub seed: u64,
}

impl EventParams {
    pub fn new(case: EventCase, trials: u64, seed: u64) -> Self {
        Self {
            case,
            gamma: None,
            lambda: None,
            k: None,
            trials,
            seed,
        }
    }
}

/// Largest admissible slack, smallest admissible bias scale and the theoretical bound.
pub fn case_parameters(delta: f64, radius: f64, d: usize, case: EventCase, k: Option<u64>) -> Result<(f64, f64)> {
    let bad = |msg: String| Error::InvalidCaseParameters(msg);
    if d < 2 {
        return Err(bad(format!("need d >= 2, got {d}")));
    }
    match case {
        EventCase::SphereUniform | EventCase::GaussianD => {
            let g = bounds::gamma_finite(delta, radius, d).map_err(|e| bad(e.to_string()))?;
            let (l1, l2, _) = bounds::lambda_minimums(radius, d, 2);
            Ok((g, if case == EventCase::SphereUniform { l1 } else { l2 }))
        }
        EventCase::GaussianK => {
            let k = k.ok_or_else(|| bad("case iii needs k".into()))?;
            let g = bounds::gamma_embedded(delta, radius, k).map_err(|e| bad(e.to_string()))?;
            Ok((g, bounds::lambda_minimums(radius, d, k).2))
        }
    }
}

/// Estimates `P(h(x_i) ≥ γ, h(x_j) ≤ −γ for all lower-norm opposite-sign x_j)` for
/// `h(x) = vᵀx + t`, with `i` indexing the norm ordering.
///
/// When no such `x_j` exists the second condition becomes `min_{‖x‖≤R} h(x) ≤ 0`.
pub fn estimate_event_probability<T: Scalar>(ds: &LabeledDataset<T>, i: usize, params: &EventParams) -> Result<EventEstimate> {
    require_trials(params.trials)?;
    let bad = |msg: String| Error::InvalidCaseParameters(msg);
    let delta = ds.delta().as_f64();
    let radius = ds.radius().as_f64();
    let d = ds.dim();
    if !delta.is_finite() {
        return Err(bad("dataset needs both classes".into()));
    }
    let (gamma_max, lambda_min) = case_parameters(delta, radius, d, params.case, params.k)?;
    let gamma = params.gamma.unwrap_or(gamma_max);
    let lambda = params.lambda.unwrap_or(lambda_min);
    if !(gamma > 0.0) || gamma > gamma_max * (1.0 + 1e-12) {
        return Err(bad(format!("gamma {gamma} outside (0, {gamma_max}]")));
    }
    if !(lambda >= lambda_min * (1.0 - 1e-12)) || !lambda.is_finite() {
        return Err(bad(format!("lambda {lambda} below the case minimum {lambda_min}")));
    }
    let bound = match params.case {
        EventCase::SphereUniform => bounds::node_success_p(delta, radius, d, lambda)?,
        EventCase::GaussianD => bounds::node_success_p(delta, radius, d, lambda)? / 10.0,
        EventCase::GaussianK => bounds::node_success_q(delta, radius, params.k.unwrap_or(2), lambda)?,
    };
    let ordered = norm_order(ds);
    if i >= ordered.len() {
        return Err(bad(format!("point index {i} out of range for {} points", ordered.len())));
    }
    let xi: Vec<f64> = vecops::convert(&ordered.entries[i].point);
    let lower: Vec<Vec<f64>> = ordered
        .lower_opposite(i)
        .map(|j| vecops::convert(&ordered.entries[j].point))
        .collect();
    let sphere = params.case == EventCase::SphereUniform;
    let successes = count_successes(params.trials, params.seed, |rng| {
        let mut v = vec![0.0; d];
        if sphere {
            sphere_into(rng, &mut v);
        } else {
            gaussian_into(rng, &mut v);
        }
        let t = lambda * (2.0 * rng.random::<f64>() - 1.0);
        if vecops::dot(&v, &xi) + t < gamma {
            return false;
        }
        if lower.is_empty() {
            t - vecops::norm(&v) * radius <= 0.0
        } else {
            lower.iter().all(|x| vecops::dot(&v, x) + t <= -gamma)
        }
    });
    Ok(EventEstimate::from_counts(Some(params.case), successes, params.trials, bound, params.seed))
}

fn check_cap_args(d: usize, r: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::Range(format!("need d >= 2, got {d}")));
    }
    if !(0.0..=2.0).contains(&r) {
        return Err(Error::Range(format!("cap radius {r} outside [0, 2]")));
    }
    Ok(())
}

/// `½(r/2)^{d−1}`.
pub fn cap_lower_bound(d: usize, r: f64) -> f64 {
    0.5 * (r / 2.0).powi(d as i32 - 1)
}

/// Exact `P(‖e₁ − v‖ ≤ r)` for `v` uniform on the sphere, by Simpson integration of
/// `sin^{d−2}θ` over the cap's polar angle.
pub fn cap_measure(d: usize, r: f64) -> Result<f64> {
    check_cap_args(d, r)?;
    let theta0 = (1.0 - r * r / 2.0).clamp(-1.0, 1.0).acos();
    let integral = |hi: f64| {
        const STEPS: usize = 20_000;
        let h = hi / STEPS as f64;
        let f = |t: f64| t.sin().powi(d as i32 - 2);
        let mut s = f(0.0) + f(hi);
        for k in 1..STEPS {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    Ok((integral(theta0) / integral(std::f64::consts::PI)).clamp(0.0, 1.0))
}

/// Estimates `P(‖e₁ − v‖ ≤ r)` for `v` uniform on `S^{d−1}`.
pub fn cap_probability_check(d: usize, r: f64, trials: u64, seed: u64) -> Result<EventEstimate> {
    check_cap_args(d, r)?;
    require_trials(trials)?;
    let successes = count_successes(trials, seed, |rng| {
        let mut v = vec![0.0; d];
        sphere_into(rng, &mut v);
        let mut diff = v;
        diff[0] -= 1.0;
        vecops::norm(&diff) <= r
    });
    Ok(EventEstimate::from_counts(None, successes, trials, cap_lower_bound(d, r), seed))
}

/// Estimates `P(1 ≤ ρ ≤ 3√d)` for `ρ² ∼ χ²_d`.
pub fn chi_interval_check(d: usize, trials: u64, seed: u64) -> Result<EventEstimate> {
    if d < 2 {
        return Err(Error::Range(format!("need d >= 2, got {d}")));
    }
    require_trials(trials)?;
    let hi = 9.0 * d as f64;
    let successes = count_successes(trials, seed, |rng| {
        let rho2: f64 = (0..d)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                g * g
            })
            .sum();
        (1.0..=hi).contains(&rho2)
    });
    Ok(EventEstimate::from_counts(None, successes, trials, 0.1, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDeviationReport {
    pub k: u64,
    pub theta: f64,
    /// Size of the difference-union set tested.
    pub set_size: usize,
    /// `theoretical_bound` is the target probability 8/9.
    pub estimate: EventEstimate,
    pub reaches_target: bool,
}

/// Estimates `P(|‖Ax‖ − ‖x‖| ≤ θ for all x)` over the difference-union set, with
/// `A = G/√k` and `G` a `k×d` standard Gaussian matrix. `θ` defaults to `δ²/(32R)`.
pub fn matrix_deviation_check<T: Scalar>(
    ds: &LabeledDataset<T>,
    k: u64,
    trials: u64,
    theta: Option<f64>,
    seed: u64,
) -> Result<MatrixDeviationReport> {
    if k < 2 {
        return Err(Error::Range(format!("need k >= 2, got {k}")));
    }
    require_trials(trials)?;
    ds.require_both_classes()?;
    let theta = theta.unwrap_or_else(|| {
        let delta = ds.delta().as_f64();
        delta * delta / (32.0 * ds.radius().as_f64())
    });
    let set: Vec<Vec<f64>> = bounds::difference_union_set(ds).iter().map(|x| vecops::convert(x)).collect();
    let norms: Vec<f64> = set.iter().map(|x| vecops::norm(x)).collect();
    let d = ds.dim();
    let ku = usize::try_from(k).map_err(|_| Error::Range(format!("k = {k} too large")))?;
    let scale = 1.0 / (k as f64).sqrt();
    let successes = count_successes(trials, seed, |rng| {
        let mut g = vec![0.0; ku * d];
        gaussian_into(rng, &mut g);
        set.iter().zip(&norms).all(|(x, &nx)| {
            let ax_sq: f64 = g
                .chunks_exact(d)
                .map(|row| {
                    let s = vecops::dot(row, x);
                    s * s
                })
                .sum();
            (ax_sq.sqrt() * scale - nx).abs() <= theta
        })
    });
    let estimate = EventEstimate::from_counts(None, successes, trials, MDI_TARGET, seed);
    Ok(MatrixDeviationReport {
        k,
        theta,
        set_size: set.len(),
        reaches_target: estimate.p_hat >= MDI_TARGET,
        estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Smallest tested `k` with `P̂(E) ≥ 8/9`, if any up to `k_max`.
    pub k: Option<u64>,
    pub theta: f64,
    /// Every `(k, p̂)` evaluated during the search.
    pub evaluations: Vec<(u64, f64)>,
    pub gaussian_width: f64,
    /// `C = k / ((32R/δ²)² (w² + R²))`.
    pub c_estimate: Option<f64>,
}

/// Binary search for the smallest `k ≤ k_max` whose deviation event reaches 8/9,
/// assuming the probability is non-decreasing in `k`. The same seed is used at every
/// `k`, and the result is turned into an estimate of the constant `C` in `k`.
pub fn calibrate_k<T: Scalar>(
    ds: &LabeledDataset<T>,
    k_max: u64,
    trials: u64,
    theta: Option<f64>,
    width_samples: u64,
    seed: u64,
) -> Result<CalibrationReport> {
    if k_max < 2 {
        return Err(Error::Range(format!("need k_max >= 2, got {k_max}")));
    }
    let mut evaluations = Vec::new();
    let mut eval = |k: u64| -> Result<(bool, f64)> {
        let r = matrix_deviation_check(ds, k, trials, theta, seed)?;
        evaluations.push((k, r.estimate.p_hat));
        Ok((r.reaches_target, r.theta))
    };
    let (ok_max, theta) = eval(k_max)?;
    let mut found = None;
    if ok_max {
        let (mut lo, mut hi) = (2u64, k_max);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if eval(mid)?.0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        found = Some(lo);
    }
    evaluations.sort_by_key(|e| e.0);
    evaluations.dedup_by_key(|e| e.0);
    let w = bounds::gaussian_width_mc(&bounds::difference_union_set(ds), width_samples, seed)?.mean.max(0.0);
    let delta = ds.delta().as_f64();
    let radius = ds.radius().as_f64();
    let factor = (32.0 * radius / (delta * delta)).powi(2) * (w * w + radius * radius);
    Ok(CalibrationReport {
        k: found,
        theta,
        evaluations,
        gaussian_width: w,
        c_estimate: found.map(|k| k as f64 / factor),
    })
}
