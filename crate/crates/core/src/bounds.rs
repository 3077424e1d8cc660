//! Closed-form width, margin and node-probability bounds, plus a Monte Carlo
//! Gaussian width estimator.
//!
//! Formula functions are generic over [`Scalar`]. The ones whose value can leave
//! the representable range have a `ln_` companion.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dedup_points, LabeledDataset};
use crate::scalar::{vecops, Scalar};
use crate::seeding;

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput {
            name,
            value: v.as_f64(),
        })
    }
}

fn dim_at_least_two(d: usize) -> Result<()> {
    if d >= 2 {
        Ok(())
    } else {
        Err(Error::NonPositiveInput {
            name: "d - 1",
            value: d as f64 - 1.0,
        })
    }
}

/// `γ = δ²/(8Rd)`, the slack for finite sets.
pub fn gamma_finite<T: Scalar>(delta: T, radius: T, d: usize) -> Result<T> {
    positive("delta", delta)?;
    positive("radius", radius)?;
    dim_at_least_two(d)?;
    Ok(delta * delta / (T::lit(8.0) * radius * T::from_usize_lossy(d)))
}

/// `γ = δ²/(18R√k)`, the slack used with Gaussian weights and embedding dimension `k`.
pub fn gamma_embedded<T: Scalar>(delta: T, radius: T, k: u64) -> Result<T> {
    positive("delta", delta)?;
    positive("radius", radius)?;
    if k < 2 {
        return Err(Error::NonPositiveInput { name: "k - 1", value: k as f64 - 1.0 });
    }
    Ok(delta * delta / (T::lit(18.0) * radius * T::lit(k as f64).sqrt()))
}

/// Natural log of [`node_success_p`].
pub fn ln_node_success_p<T: Scalar>(delta: T, radius: T, d: usize, lambda: T) -> Result<T> {
    positive("delta", delta)?;
    positive("radius", radius)?;
    positive("lambda", lambda)?;
    dim_at_least_two(d)?;
    let prefactor = radius / (T::lit(8.0) * T::from_usize_lossy(d - 1) * lambda);
    let ratio = delta * delta / (T::lit(8.0) * radius * radius);
    Ok(prefactor.ln() + T::from_usize_lossy(d) * ratio.ln())
}

/// `p = R/(8(d−1)λ) · (δ²/8R²)^d`, the per-node success probability with sphere-uniform normals.
///
/// Values above 1 are returned unchanged; see [`BoundsReport::warnings`].
pub fn node_success_p<T: Scalar>(delta: T, radius: T, d: usize, lambda: T) -> Result<T> {
    ln_node_success_p(delta, radius, d, lambda).map(T::exp)
}

/// Natural log of [`node_success_q`].
pub fn ln_node_success_q<T: Scalar>(delta: T, radius: T, k: u64, lambda: T) -> Result<T> {
    positive("delta", delta)?;
    positive("radius", radius)?;
    positive("lambda", lambda)?;
    if k < 2 {
        return Err(Error::NonPositiveInput { name: "k - 1", value: k as f64 - 1.0 });
    }
    let kf = T::lit(k as f64);
    let prefactor = radius / (T::lit(4.0) * lambda * kf.sqrt());
    let ratio = T::lit(2.0) * delta * delta / (T::lit(81.0) * radius * radius);
    Ok(prefactor.ln() + kf * ratio.ln())
}

/// `q = R/(4λ√k) · (2δ²/81R²)^k`.
pub fn node_success_q<T: Scalar>(delta: T, radius: T, k: u64, lambda: T) -> Result<T> {
    ln_node_success_q(delta, radius, k, lambda).map(T::exp)
}

/// `k = max(2, ⌈C (32R/δ²)² (w² + R²)⌉)`, saturating at `u64::MAX`.
pub fn dimension_k<T: Scalar>(delta: T, radius: T, width_sq: T, c_const: T) -> Result<u64> {
    positive("delta", delta)?;
    positive("radius", radius)?;
    positive("C", c_const)?;
    if !(width_sq >= T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "width_sq",
            value: width_sq.as_f64(),
        });
    }
    let s = T::lit(32.0) * radius / (delta * delta);
    let raw = (c_const * s * s * (width_sq + radius * radius)).as_f64().ceil();
    Ok(if raw >= u64::MAX as f64 { u64::MAX } else { (raw as u64).max(2) })
}

/// `M(γ, N)` together with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginBound<T> {
    /// `M(γ, N)`, or zero when it underflows.
    pub value: T,
    pub ln_value: T,
    /// Set when `value` underflowed to zero while `ln_value` is finite.
    pub underflow: bool,
}

/// `ln(e^x − 1)` without overflow for large `x`.
fn ln_expm1<T: Scalar>(x: T) -> T {
    if x > T::lit(30.0) {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `M(γ, N) = sqrt(4R(R+γ) / (N((1+2R/γ)^{2N} − 1)))`, evaluated in log space.
pub fn margin_bound<T: Scalar>(gamma: T, n: usize, radius: T) -> Result<MarginBound<T>> {
    positive("gamma", gamma)?;
    positive("radius", radius)?;
    if n == 0 {
        return Err(Error::NonPositiveInput { name: "N", value: 0.0 });
    }
    let two = T::lit(2.0);
    let nf = T::from_usize_lossy(n);
    let l = two * nf * (two * radius / gamma).ln_1p();
    let ln_num = (T::lit(4.0) * radius * (radius + gamma)).ln();
    let ln_value = (ln_num - nf.ln() - ln_expm1(l)) / two;
    if !ln_value.is_finite() {
        return Err(Error::Overflow("margin_bound"));
    }
    let value = ln_value.exp();
    Ok(MarginBound {
        value,
        ln_value,
        underflow: value == T::zero(),
    })
}

/// `√N · M(γ, N)`, the guaranteed margin of the deterministic construction.
pub fn certified_margin_bound<T: Scalar>(gamma: T, n: usize, radius: T) -> Result<MarginBound<T>> {
    let m = margin_bound(gamma, n, radius)?;
    let ln_value = m.ln_value + T::from_usize_lossy(n).ln() / T::lit(2.0);
    let value = ln_value.exp();
    Ok(MarginBound {
        value,
        ln_value,
        underflow: value == T::zero(),
    })
}

fn check_width_inputs(n: usize, eta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::NonPositiveInput { name: "N", value: 0.0 });
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidProbability { name: "eta", value: eta });
    }
    Ok(())
}

/// `ln(N/η) / p` before rounding, from `ln p`. May be `+inf`.
pub fn required_width_real_ln(ln_node_prob: f64, n: usize, eta: f64) -> Result<f64> {
    check_width_inputs(n, eta)?;
    if ln_node_prob.is_nan() || ln_node_prob > 0.0 {
        return Err(Error::InvalidProbability {
            name: "node_prob",
            value: ln_node_prob.exp(),
        });
    }
    let numer = (n as f64).ln() - eta.ln();
    Ok((numer.ln() - ln_node_prob).exp())
}

/// `ln(N/η) / p` before rounding.
pub fn required_width_real(node_prob: f64, n: usize, eta: f64) -> Result<f64> {
    if !(node_prob > 0.0 && node_prob <= 1.0) {
        return Err(Error::InvalidProbability { name: "node_prob", value: node_prob });
    }
    check_width_inputs(n, eta)?;
    Ok(((n as f64).ln() - eta.ln()) / node_prob)
}

/// `⌈ln(N/η) / p⌉`, saturating at `u64::MAX`.
pub fn required_width(node_prob: f64, n: usize, eta: f64) -> Result<u64> {
    required_width_real(node_prob, n, eta).map(ceil_u64)
}

pub(crate) fn ceil_u64(x: f64) -> u64 {
    let c = x.ceil();
    if c >= u64::MAX as f64 {
        u64::MAX
    } else {
        c.max(0.0) as u64
    }
}

/// Monte Carlo estimate of `E[sup_{x∈T} gᵀx]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWidthEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Averages `sup_x gᵀx` over `samples` standard Gaussian draws.
///
/// Samples are split into fixed chunks with derived seeds, so the result does
/// not depend on the number of worker threads.
pub fn gaussian_width_mc<T: Scalar>(points: &[Vec<T>], samples: u64, seed: u64) -> Result<GaussianWidthEstimate> {
    if points.is_empty() {
        return Err(Error::EmptyInput("gaussian_width_mc points"));
    }
    if samples == 0 {
        return Err(Error::EmptyInput("gaussian_width_mc samples"));
    }
    let d = points[0].len();
    let pts: Vec<Vec<f64>> = points.iter().map(|p| vecops::convert(p)).collect();
    let parts: Vec<Moments> = seeding::with_pool(|| {
        seeding::chunks(samples)
            .into_par_iter()
            .map(|(c, len)| {
                let mut rng = seeding::derived_rng(seed, &[c]);
                let mut g = vec![0.0f64; d];
                let mut m = Moments::default();
                for _ in 0..len {
                    for gi in g.iter_mut() {
                        *gi = StandardNormal.sample(&mut rng);
                    }
                    let sup = pts
                        .iter()
                        .map(|p| vecops::dot(&g, p))
                        .fold(f64::NEG_INFINITY, f64::max);
                    m.push(sup);
                }
                m
            })
            .collect()
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if m.n > 1.0 { m.m2 / (m.n - 1.0) } else { 0.0 };
    Ok(GaussianWidthEstimate {
        mean: m.mean,
        stderr: (var / m.n).sqrt(),
        samples,
        seed,
    })
}

/// `(X⁺ − X⁻) ∪ X⁺ ∪ X⁻` with exact duplicates removed.
pub fn difference_union_set<T: Scalar>(ds: &LabeledDataset<T>) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(ds.points_pos().len() * ds.points_neg().len() + ds.n_total());
    out.extend(ds.points_pos().iter().cloned());
    out.extend(ds.points_neg().iter().cloned());
    for p in ds.points_pos() {
        for q in ds.points_neg() {
            out.push(vecops::sub(p, q));
        }
    }
    dedup_points(out)
}

/// Bias scale per width case. Unset entries fall back to each case's minimum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaChoice {
    pub case_i: Option<f64>,
    pub case_ii: Option<f64>,
    pub case_iii: Option<f64>,
}

impl LambdaChoice {
    pub fn all(lambda: f64) -> Self {
        Self {
            case_i: Some(lambda),
            case_ii: Some(lambda),
            case_iii: Some(lambda),
        }
    }
}

/// Inputs of [`bounds_report`] beyond the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsOptions {
    pub eta: f64,
    pub lambda: LambdaChoice,
    pub c_const: f64,
    /// Samples for the Gaussian width of the difference-union set.
    pub width_samples: u64,
    pub seed: u64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            eta: 0.1,
            lambda: LambdaChoice::default(),
            c_const: 1.0,
            width_samples: 10_000,
            seed: 0,
        }
    }
}

/// Every bound for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub delta: f64,
    pub radius: f64,
    pub d: usize,
    pub n: usize,
    pub eta: f64,
    pub gamma: f64,
    pub gamma_iii: f64,
    pub p: f64,
    pub ln_p: f64,
    pub q: f64,
    pub ln_q: f64,
    pub k: u64,
    pub gaussian_width: GaussianWidthEstimate,
    pub margin: f64,
    pub ln_margin: f64,
    pub lambda_case_i: f64,
    pub lambda_case_ii: f64,
    pub lambda_case_iii: f64,
    /// Real-valued widths are `null` in JSON when infinite.
    pub width_case_i: f64,
    pub width_case_ii: f64,
    pub width_case_iii: f64,
    pub log10_width_case_i: f64,
    pub log10_width_case_ii: f64,
    pub log10_width_case_iii: f64,
    #[serde(rename = "C_used")]
    pub c_used: f64,
    pub warnings: Vec<String>,
}

/// Smallest bias scales covered by the width cases: `R`, `3R√d`, `9R√k/8`.
pub fn lambda_minimums(radius: f64, d: usize, k: u64) -> (f64, f64, f64) {
    (
        radius,
        3.0 * radius * (d as f64).sqrt(),
        9.0 * radius * (k as f64).sqrt() / 8.0,
    )
}

/// Computes γ, p, q, k, M(γ,N) and the three width requirements for a two-class dataset.
pub fn bounds_report<T: Scalar>(ds: &LabeledDataset<T>, opts: &BoundsOptions) -> Result<BoundsReport> {
    ds.require_both_classes()?;
    let delta = ds.delta().as_f64();
    let radius = ds.radius().as_f64();
    let d = ds.dim();
    let n = ds.n_total();
    let mut warnings = Vec::new();
    if d < 2 {
        warnings.push("d = 1: bounds carry no guarantee below two dimensions".into());
    }
    let d_eff = d.max(2);

    let gw = gaussian_width_mc(&difference_union_set(ds), opts.width_samples, opts.seed)?;
    let k = dimension_k(delta, radius, gw.mean.max(0.0).powi(2), opts.c_const)?;
    let (min_i, min_ii, min_iii) = lambda_minimums(radius, d_eff, k);
    let pick = |v: Option<f64>, min: f64, case: &str, warnings: &mut Vec<String>| {
        let l = v.unwrap_or(min);
        if l < min {
            warnings.push(format!("lambda {l} is below the case {case} minimum {min}"));
        }
        l
    };
    let lambda_i = pick(opts.lambda.case_i, min_i, "i", &mut warnings);
    let lambda_ii = pick(opts.lambda.case_ii, min_ii, "ii", &mut warnings);
    let lambda_iii = pick(opts.lambda.case_iii, min_iii, "iii", &mut warnings);

    let gamma = gamma_finite(delta, radius, d_eff)?;
    let gamma_iii = gamma_embedded(delta, radius, k)?;
    let ln_p = ln_node_success_p(delta, radius, d_eff, lambda_i)?;
    let ln_p_ii = ln_node_success_p(delta, radius, d_eff, lambda_ii)?;
    let ln_q = ln_node_success_q(delta, radius, k, lambda_iii)?;
    if ln_p > 0.0 {
        warnings.push(format!("p = {} exceeds 1", ln_p.exp()));
    }
    let margin = margin_bound(gamma, n, radius)?;
    let w_i = required_width_real_ln(ln_p.min(0.0), n, opts.eta)?;
    let w_ii = 10.0 * required_width_real_ln(ln_p_ii.min(0.0), n, opts.eta)?;
    let w_iii = required_width_real_ln(ln_q.min(0.0), n, opts.eta)?;
    let log10_w = |ln_prob: f64, factor: f64| {
        (((n as f64).ln() - opts.eta.ln()).ln() - ln_prob.min(0.0) + factor.ln()) / std::f64::consts::LN_10
    };
    Ok(BoundsReport {
        delta,
        radius,
        d,
        n,
        eta: opts.eta,
        gamma,
        gamma_iii,
        p: ln_p.exp(),
        ln_p,
        q: ln_q.exp(),
        ln_q,
        k,
        gaussian_width: gw,
        margin: margin.value,
        ln_margin: margin.ln_value,
        lambda_case_i: lambda_i,
        lambda_case_ii: lambda_ii,
        lambda_case_iii: lambda_iii,
        width_case_i: w_i.ceil(),
        width_case_ii: w_ii.ceil(),
        width_case_iii: w_iii.ceil(),
        log10_width_case_i: log10_w(ln_p, 1.0),
        log10_width_case_ii: log10_w(ln_p_ii, 10.0),
        log10_width_case_iii: log10_w(ln_q, 1.0),
        c_used: opts.c_const,
        warnings,
    })
}
