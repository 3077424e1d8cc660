//! End-to-end check of the width theorem at the width it prescribes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::geometry::LabeledDataset;
use crate::mc_verify::{wilson_interval, Z99};
use crate::rinn::{forward_all, sample_layer, WeightDist};
use crate::seeding;
use crate::sep_check::{max_margin_separator_with, SolverOptions};

pub const DEFAULT_WIDTH_CAP: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum AuditCase {
    /// Sphere-uniform rows, `λ = R`, width `ln(N/η)/p`.
    I,
    /// Gaussian rows, `λ = 3R√d`, width `10 ln(N/η)/p`.
    Ii,
    /// Gaussian rows, `λ = 9R√k/8`, width `ln(N/η)/q`.
    Iii { k: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub trials: u64,
    pub seed: u64,
    pub width_cap: u64,
    pub solver_budget: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            width_cap: DEFAULT_WIDTH_CAP,
            solver_budget: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthPlan {
    pub case: AuditCase,
    pub node_probability: f64,
    pub lambda: f64,
    pub dist: WeightDist,
    /// Unrounded bound; may be astronomically large.
    pub width_real: f64,
    pub log10_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub plan: WidthPlan,
    pub width: u64,
    pub eta: f64,
    pub target: f64,
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `p_hat ≥ (1 − η) − 3·stderr`.
    pub meets_target: bool,
}

/// Width and layer parameters the theorem prescribes for `ds`.
pub fn width_plan<T: crate::Scalar>(ds: &LabeledDataset<T>, eta: f64, case: AuditCase) -> Result<WidthPlan> {
    ds.require_both_classes()?;
    let delta = ds.delta().as_f64();
    let radius = ds.radius().as_f64();
    let d = ds.dim().max(2);
    let n = ds.n_total();
    let (l1, l2, _) = bounds::lambda_minimums(radius, d, 2);
    let (ln_prob, lambda, dist, factor) = match case {
        AuditCase::I => (bounds::ln_node_success_p(delta, radius, d, l1)?, l1, WeightDist::UnitSphereRows, 1.0),
        AuditCase::Ii => (bounds::ln_node_success_p(delta, radius, d, l2)?, l2, WeightDist::GaussianRows, 10.0),
        AuditCase::Iii { k } => {
            let l3 = bounds::lambda_minimums(radius, d, k).2;
            (bounds::ln_node_success_q(delta, radius, k, l3)?, l3, WeightDist::GaussianRows, 1.0)
        }
    };
    let ln_prob = ln_prob.min(0.0);
    let width_real = factor * bounds::required_width_real_ln(ln_prob, n, eta)?;
    let log10_width = ((n as f64 / eta).ln().ln() - ln_prob + factor.ln()) / std::f64::consts::LN_10;
    Ok(WidthPlan {
        case,
        node_probability: ln_prob.exp(),
        lambda,
        dist,
        width_real,
        log10_width,
    })
}

/// Samples unnormalized layers at the prescribed width and counts how often the
/// two classes become linearly separable.
///
/// Refuses widths above `opts.width_cap` with [`Error::WidthTooLarge`].
pub fn theorem_width_audit<T: crate::Scalar>(
    ds: &LabeledDataset<T>,
    eta: f64,
    case: AuditCase,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let plan = width_plan(ds, eta, case)?;
    if !(plan.width_real <= opts.width_cap as f64) {
        return Err(Error::WidthTooLarge {
            width: plan.width_real,
            cap: opts.width_cap,
        });
    }
    let width = (plan.width_real.ceil() as u64).max(1);
    let pos: Vec<Vec<f64>> = ds.points_pos().iter().map(|x| crate::scalar::vecops::convert(x)).collect();
    let neg: Vec<Vec<f64>> = ds.points_neg().iter().map(|x| crate::scalar::vecops::convert(x)).collect();
    let solver = SolverOptions {
        budget: opts.solver_budget,
        optimize_margin: false,
        early_exit: true,
        ..SolverOptions::default()
    };
    let successes: u64 = seeding::with_pool(|| {
        (0..opts.trials)
            .into_par_iter()
            .map(|t| -> Result<bool> {
                let layer = sample_layer::<f64>(ds.dim(), width as usize, plan.lambda, plan.dist, false, seeding::derive_seed(opts.seed, &[t]))?;
                let fp = forward_all(&layer, &pos)?;
                let fneg = forward_all(&layer, &neg)?;
                Ok(max_margin_separator_with(&fp, &fneg, &solver)?.is_separated())
            })
            .map(|r| u64::from(r.unwrap_or(false)))
            .sum()
    });
    let trials = opts.trials;
    let p_hat = successes as f64 / trials as f64;
    let stderr = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
    let (ci_low, ci_high) = wilson_interval(successes, trials, Z99);
    let target = 1.0 - eta;
    Ok(AuditReport {
        plan,
        width,
        eta,
        target,
        successes,
        trials,
        p_hat,
        stderr,
        ci_low,
        ci_high,
        meets_target: p_hat >= target - 3.0 * stderr,
    })
}

/// Two antipodal clusters in the plane with `δ/2R = ratio`, `m` points per class.
pub fn antipodal_clusters(m: usize, ratio: f64, seed: u64) -> Result<LabeledDataset<f64>> {
    use rand::Rng;
    if !(ratio > 0.0 && ratio < 1.0) || m == 0 {
        return Err(Error::InvalidConfig(format!("need 0 < ratio < 1 and m >= 1, got {ratio}, {m}")));
    }
    // Points lie on the unit circle within a small arc around ±e₁; the arc is
    // chosen so the closest cross pair is at distance exactly 2·ratio.
    let half = ratio.acos();
    let mut rng = seeding::rng(seed);
    let mut arc = |sign: f64| -> Vec<Vec<f64>> {
        let mut pts = vec![vec![sign * half.cos(), half.sin()]];
        for _ in 1..m {
            let a = half * (2.0 * rng.random::<f64>() - 1.0);
            pts.push(vec![sign * a.cos(), a.sin()]);
        }
        pts
    };
    let pos = arc(1.0);
    let neg = arc(-1.0);
    LabeledDataset::new(pos, neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineered_clusters_have_requested_ratio() {
        let ds = antipodal_clusters(6, 0.9, 3).unwrap();
        assert!((ds.radius() - 1.0).abs() < 1e-12);
        assert!((ds.delta() / (2.0 * ds.radius()) - 0.9).abs() < 1e-9, "{}", ds.delta());
    }

    #[test]
    fn plan_matches_closed_form() {
        let ds = antipodal_clusters(5, 0.9, 0).unwrap();
        let plan = width_plan(&ds, 0.1, AuditCase::I).unwrap();
        let p = bounds::node_success_p(ds.delta(), 1.0, 2, 1.0).unwrap();
        assert!((plan.node_probability - p).abs() < 1e-12);
        assert!((plan.width_real - (10.0f64 / 0.1).ln() / p).abs() < 1e-6);
    }

    #[test]
    fn huge_width_is_refused() {
        let ds = antipodal_clusters(5, 0.05, 0).unwrap();
        let opts = AuditOptions {
            width_cap: 1000,
            ..Default::default()
        };
        assert!(matches!(theorem_width_audit(&ds, 0.1, AuditCase::Ii, &opts), Err(Error::WidthTooLarge { .. })));
    }
}
