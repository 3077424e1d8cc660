//! Deterministic separating layer and its explicit output hyperplane.
//!
//! [`build_deterministic_layer`] processes points in descending norm and gives
//! each one a hyperplane that is `>= γ` on it and `<= −γ` on every later point
//! of the other class. [`build_separating_weights`] then solves for output
//! weights backwards so that `σ(x)·aᵀΦ(x) >= 1` at every point.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::geometry::{norm_order, LabeledDataset, OrderedPoints, Sign};
use crate::rinn::ReluLayer;
use crate::scalar::{vecops, Scalar};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperplaneSource {
    DirectConstruction,
    RejectionSample,
    RandomLayerNode,
}

/// `h(x) = wᵀx + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct Hyperplane<T> {
    pub normal: Vec<T>,
    pub offset: T,
    pub source: HyperplaneSource,
}

impl<T: Scalar> Hyperplane<T> {
    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        vecops::dot(&self.normal, x) + self.offset
    }

    /// Minimum of `h` over the ball of radius `r` about the origin.
    pub fn min_over_ball(&self, r: T) -> T {
        self.offset - r * vecops::norm(&self.normal)
    }
}

/// One hyperplane per ordered point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct DetLayer<T> {
    pub hyperplanes: Vec<Hyperplane<T>>,
    pub gamma: T,
    pub radius: T,
    pub ordered: OrderedPoints<T>,
    /// For points with no later opposite-class point: a point of the radius ball where `h <= 0`.
    pub witnesses: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> DetLayer<T> {
    pub fn width(&self) -> usize {
        self.hyperplanes.len()
    }

    /// `ReLU(Wx + b)` without output scaling.
    pub fn features(&self, x: &[T]) -> Vec<T> {
        self.hyperplanes
            .iter()
            .map(|h| {
                let z = h.eval(x);
                if z > T::zero() {
                    z
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// The same map as an unnormalized [`ReluLayer`].
    pub fn to_relu_layer(&self) -> Result<ReluLayer<T>> {
        let d = self.hyperplanes.first().map(|h| h.normal.len()).unwrap_or(0);
        let weights = self.hyperplanes.iter().flat_map(|h| h.normal.iter().copied()).collect();
        let bias = self.hyperplanes.iter().map(|h| h.offset).collect();
        ReluLayer::from_parts(weights, bias, d, false)
    }

    /// Re-evaluates every hyperplane condition; the first failure is returned as `InvalidLayer`.
    pub fn check_invariant(&self) -> Result<()> {
        let tol = check_tol(self.radius);
        let n = self.ordered.len();
        if self.hyperplanes.len() != n || self.witnesses.len() != n {
            return Err(Error::InvalidLayer {
                index: 0,
                reason: format!("{} hyperplanes for {n} points", self.hyperplanes.len()),
            });
        }
        for (i, h) in self.hyperplanes.iter().enumerate() {
            let xi = &self.ordered.entries[i].point;
            if h.eval(xi) < self.gamma - tol {
                return Err(Error::InvalidLayer {
                    index: i,
                    reason: format!("h(x_i) = {} below gamma {}", h.eval(xi), self.gamma),
                });
            }
            let mut any = false;
            for j in self.ordered.lower_opposite(i) {
                any = true;
                let v = h.eval(&self.ordered.entries[j].point);
                if v > -self.gamma + tol {
                    return Err(Error::InvalidLayer {
                        index: i,
                        reason: format!("h(x_{j}) = {v} above -gamma"),
                    });
                }
            }
            if !any {
                let ok = match &self.witnesses[i] {
                    Some(w) => {
                        vecops::norm(w) <= self.radius * (T::one() + T::lit(T::CHECK_TOL)) && h.eval(w) <= tol
                    }
                    None => false,
                };
                if !ok {
                    return Err(Error::InvalidLayer {
                        index: i,
                        reason: "missing or invalid witness for unconstrained node".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn check_tol<T: Scalar>(radius: T) -> T {
    T::lit(T::CHECK_TOL) * radius.max(T::one())
}

/// Rejection-sampling settings used when the direct construction does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallbackOptions {
    /// Bias range `[−λ, λ]`.
    pub lambda: f64,
    pub max_attempts: u64,
    pub seed: u64,
    /// Skip the direct construction and always sample.
    pub force_rejection: bool,
}

impl FallbackOptions {
    /// `λ = R` and `min(⌈10/p⌉, 10⁶)` attempts.
    pub fn for_dataset<T: Scalar>(ds: &LabeledDataset<T>, seed: u64) -> Self {
        let r = ds.radius().as_f64().max(f64::MIN_POSITIVE);
        let p = if ds.delta().is_finite() && ds.dim() >= 2 {
            bounds::node_success_p(ds.delta().as_f64(), r, ds.dim(), r).unwrap_or(0.0)
        } else {
            0.0
        };
        Self {
            lambda: r,
            max_attempts: default_attempts(p),
            seed,
            force_rejection: false,
        }
    }
}

/// `min(⌈10/p⌉, 10⁶)`.
pub fn default_attempts(p: f64) -> u64 {
    const CAP: u64 = 1_000_000;
    if p > 0.0 {
        bounds::ceil_u64(10.0 / p).clamp(1, CAP)
    } else {
        CAP
    }
}

fn unit_axis<T: Scalar>(d: usize) -> Vec<T> {
    let mut e = vec![T::zero(); d];
    e[0] = T::one();
    e
}

fn direct_construction<T: Scalar>(
    i: usize,
    ordered: &OrderedPoints<T>,
    gamma: T,
    radius: T,
) -> Option<(Hyperplane<T>, Option<Vec<T>>)> {
    let xi = &ordered.entries[i].point;
    let d = xi.len();
    let nrm = vecops::norm(xi);
    let lower: Vec<usize> = ordered.lower_opposite(i).collect();
    let tol = check_tol(radius);

    if nrm == T::zero() {
        if !lower.is_empty() {
            return None;
        }
        let w = unit_axis::<T>(d);
        let witness = vecops::scale(&w, -radius);
        return Some((
            Hyperplane {
                normal: w,
                offset: gamma,
                source: HyperplaneSource::DirectConstruction,
            },
            Some(witness),
        ));
    }

    let w = vecops::scale(xi, T::one() / nrm);
    let lo = gamma - vecops::dot(&w, xi);
    if lower.is_empty() {
        let b = T::zero().max(lo).min(radius);
        let witness = vecops::scale(&w, -radius);
        let h = Hyperplane {
            normal: w,
            offset: b,
            source: HyperplaneSource::DirectConstruction,
        };
        return (h.eval(xi) >= gamma - tol).then_some((h, Some(witness)));
    }
    let m = lower
        .iter()
        .map(|&j| vecops::dot(&w, &ordered.entries[j].point))
        .fold(T::neg_infinity(), T::max);
    let hi = -gamma - m;
    if lo > hi {
        return None;
    }
    let h = Hyperplane {
        normal: w,
        offset: (lo + hi) / T::lit(2.0),
        source: HyperplaneSource::DirectConstruction,
    };
    let ok = h.eval(xi) >= gamma - tol
        && lower
            .iter()
            .all(|&j| h.eval(&ordered.entries[j].point) <= -gamma + tol);
    ok.then_some((h, None))
}

fn sample_unit<T: Scalar, R: Rng>(d: usize, rng: &mut R) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

fn rejection_sample<T: Scalar>(
    i: usize,
    ordered: &OrderedPoints<T>,
    gamma: T,
    radius: T,
    opts: &FallbackOptions,
) -> Result<(Hyperplane<T>, Option<Vec<T>>)> {
    let xi = &ordered.entries[i].point;
    let d = xi.len();
    let lower: Vec<usize> = ordered.lower_opposite(i).collect();
    let tol = check_tol(radius);
    let mut rng = seeding::derived_rng(opts.seed, &[i as u64]);
    let mut best: Option<Vec<usize>> = None;
    for _ in 0..opts.max_attempts {
        let w: Vec<T> = sample_unit(d, &mut rng);
        let u: f64 = rng.random::<f64>();
        let b = T::lit(opts.lambda * (2.0 * u - 1.0));
        let h = Hyperplane {
            normal: w,
            offset: b,
            source: HyperplaneSource::RejectionSample,
        };
        let mut violated = Vec::new();
        if h.eval(xi) < gamma - tol {
            violated.push(i);
        }
        for &j in &lower {
            if h.eval(&ordered.entries[j].point) > -gamma + tol {
                violated.push(j);
            }
        }
        let witness = if lower.is_empty() {
            if h.min_over_ball(radius) > tol {
                violated.push(usize::MAX);
            }
            Some(vecops::scale(&h.normal, -radius))
        } else {
            None
        };
        if violated.is_empty() {
            return Ok((h, witness));
        }
        if best.as_ref().is_none_or(|b| violated.len() < b.len()) {
            best = Some(violated);
        }
    }
    Err(Error::NoHyperplaneFound {
        index: i,
        attempts: opts.max_attempts,
        violated: best.unwrap_or_default(),
    })
}

/// Finds a hyperplane isolating ordered point `i` from later points of the other class.
///
/// Returns the hyperplane and, when no such later point exists, a witness in the
/// radius ball where it is non-positive.
pub fn find_hyperplane_for_point<T: Scalar>(
    i: usize,
    ordered: &OrderedPoints<T>,
    gamma: T,
    radius: T,
    opts: &FallbackOptions,
) -> Result<(Hyperplane<T>, Option<Vec<T>>)> {
    if i >= ordered.len() {
        return Err(Error::Range(format!("point index {i} out of {}", ordered.len())));
    }
    if !opts.force_rejection {
        if let Some(found) = direct_construction(i, ordered, gamma, radius) {
            return Ok(found);
        }
    }
    rejection_sample(i, ordered, gamma, radius, opts)
}

/// Builds a layer on an explicit ordering (used for cover centers).
pub fn build_layer_on_points<T: Scalar>(
    ordered: OrderedPoints<T>,
    gamma: T,
    radius: T,
    opts: &FallbackOptions,
) -> Result<DetLayer<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::NonPositiveInput {
            name: "gamma",
            value: gamma.as_f64(),
        });
    }
    if ordered.is_empty() {
        return Err(Error::EmptyInput("layer points"));
    }
    let found: Vec<Result<_>> = seeding::with_pool(|| {
        (0..ordered.len())
            .into_par_iter()
            .map(|i| find_hyperplane_for_point(i, &ordered, gamma, radius, opts))
            .collect()
    });
    let mut hyperplanes = Vec::with_capacity(found.len());
    let mut witnesses = Vec::with_capacity(found.len());
    for f in found {
        let (h, w) = f?;
        hyperplanes.push(h);
        witnesses.push(w);
    }
    Ok(DetLayer {
        hyperplanes,
        gamma,
        radius,
        ordered,
        witnesses,
    })
}

/// Deterministic separating layer for `ds` with slack `gamma`.
pub fn build_deterministic_layer<T: Scalar>(ds: &LabeledDataset<T>, gamma: T) -> Result<DetLayer<T>> {
    build_deterministic_layer_with(ds, gamma, &FallbackOptions::for_dataset(ds, 0))
}

pub fn build_deterministic_layer_with<T: Scalar>(
    ds: &LabeledDataset<T>,
    gamma: T,
    opts: &FallbackOptions,
) -> Result<DetLayer<T>> {
    build_layer_on_points(norm_order(ds), gamma, ds.radius(), opts)
}

/// Output hyperplane `x ↦ aᵀx + c` with its slacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct SeparationCertificate<T> {
    pub weights: Vec<T>,
    pub offset: T,
    /// Minimum slack.
    pub margin: T,
    /// `σ(x)(aᵀΦ(x) + c)/‖a‖` per point.
    pub slacks: Vec<T>,
}

impl<T: Scalar> SeparationCertificate<T> {
    pub fn is_valid(&self) -> bool {
        self.slacks.iter().all(|&s| s > T::zero())
    }
}

/// Euclidean norm that does not overflow for entries near the top of the range.
pub fn stable_norm<T: Scalar>(a: &[T]) -> T {
    let m = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s: T = a.iter().map(|v| (*v / m) * (*v / m)).sum();
    m * s.sqrt()
}

/// `σ(aᵀφ + c)/‖a‖` for each feature vector.
pub fn normalized_slacks<T: Scalar>(a: &[T], c: T, features: &[Vec<T>], signs: &[Sign]) -> Result<Vec<T>> {
    let na = stable_norm(a);
    if !(na > T::zero()) || !na.is_finite() {
        return Err(Error::Overflow("output weight norm"));
    }
    let unit: Vec<T> = a.iter().map(|v| *v / na).collect();
    let cu = c / na;
    Ok(features
        .iter()
        .zip(signs)
        .map(|(phi, s)| s.value::<T>() * (vecops::dot(&unit, phi) + cu))
        .collect())
}

fn certificate_from<T: Scalar>(a: Vec<T>, features: &[Vec<T>], signs: &[Sign]) -> Result<SeparationCertificate<T>> {
    let slacks = normalized_slacks(&a, T::zero(), features, signs)?;
    let margin = slacks.iter().copied().fold(T::infinity(), T::min);
    Ok(SeparationCertificate {
        weights: a,
        offset: T::zero(),
        margin,
        slacks,
    })
}

/// Backward recursion `a_i = σ_i(1 + |Σ_{j>i} a_j Φ(x_i)_j|)/γ` on precomputed features.
pub fn backward_weights<T: Scalar>(features: &[Vec<T>], signs: &[Sign], gamma: T) -> Result<Vec<T>> {
    let n = features.len();
    let mut a = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|j| a[j] * features[i][j]).sum();
        a[i] = signs[i].value::<T>() * (T::one() + s.abs()) / gamma;
        if !a[i].is_finite() {
            return Err(Error::Overflow("output weights"));
        }
    }
    Ok(a)
}

/// Output weights for a deterministic layer; `c = 0`.
pub fn build_separating_weights<T: Scalar>(layer: &DetLayer<T>, ds: &LabeledDataset<T>) -> Result<SeparationCertificate<T>> {
    layer.check_invariant()?;
    if layer.ordered.len() != ds.n_total() {
        return Err(Error::InvalidLayer {
            index: 0,
            reason: format!("layer has {} nodes, dataset has {} points", layer.ordered.len(), ds.n_total()),
        });
    }
    let features: Vec<Vec<T>> = layer.ordered.entries.iter().map(|e| layer.features(&e.point)).collect();
    let signs: Vec<Sign> = layer.ordered.entries.iter().map(|e| e.sign).collect();
    let a = backward_weights(&features, &signs, layer.gamma)?;
    certificate_from(a, &features, &signs)
}

/// Output weights for a layer built on cover centers.
///
/// `a_i = (2σ_i/γ) · sup_x (1 + |Σ_{j>i} a_j Φ(x)_j|)` over the points of the
/// center's class inside its ball. Slacks are reported over `ds`, positives first.
pub fn build_cover_weights<T: Scalar>(
    layer: &DetLayer<T>,
    radii_pos: &[T],
    radii_neg: &[T],
    ds: &LabeledDataset<T>,
) -> Result<SeparationCertificate<T>> {
    layer.check_invariant()?;
    let tol = check_tol(layer.radius);
    let pos_feat: Vec<Vec<T>> = ds.points_pos().iter().map(|x| layer.features(x)).collect();
    let neg_feat: Vec<Vec<T>> = ds.points_neg().iter().map(|x| layer.features(x)).collect();
    let n = layer.width();
    let mut a = vec![T::zero(); n];
    let two_over_gamma = T::lit(2.0) / layer.gamma;
    for i in (0..n).rev() {
        let e = &layer.ordered.entries[i];
        let (pts, feats, radii) = match e.sign {
            Sign::Pos => (ds.points_pos(), &pos_feat, radii_pos),
            Sign::Neg => (ds.points_neg(), &neg_feat, radii_neg),
        };
        let r = *radii.get(e.index).ok_or_else(|| Error::InvalidLayer {
            index: i,
            reason: format!("no radius for center {}", e.index),
        })?;
        let mut sup = T::one();
        for (x, phi) in pts.iter().zip(feats) {
            if vecops::dist(x, &e.point) <= r + tol {
                let s: T = (i + 1..n).map(|j| a[j] * phi[j]).sum();
                sup = sup.max(T::one() + s.abs());
            }
        }
        a[i] = e.sign.value::<T>() * two_over_gamma * sup;
        if !a[i].is_finite() {
            return Err(Error::Overflow("output weights"));
        }
    }
    let mut features = pos_feat;
    features.extend(neg_feat);
    let signs: Vec<Sign> = ds.iter_signed().map(|(s, _, _)| s).collect();
    certificate_from(a, &features, &signs)
}

/// `ã_ℓ = Σ_{i: f(i)=ℓ} a_i`, zero on nodes outside the image of `f`.
pub fn collapse_duplicates<T: Scalar>(assignment: &[usize], a: &[T], n_nodes: usize) -> Result<Vec<T>> {
    if assignment.len() != a.len() {
        return Err(Error::InconsistentAssignment(format!(
            "{} assignments for {} weights",
            assignment.len(),
            a.len()
        )));
    }
    let mut out = vec![T::zero(); n_nodes];
    for (i, (&l, &w)) in assignment.iter().zip(a).enumerate() {
        let slot = out.get_mut(l).ok_or_else(|| {
            Error::InconsistentAssignment(format!("index {i} maps to node {l}, layer has {n_nodes}"))
        })?;
        *slot = *slot + w;
    }
    Ok(out)
}

/// Which margin guarantee a certificate is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// `√N · M(γ, N)`.
    Finite,
    /// `√N · M(γ/2, N)` with `N` the number of cover centers.
    Cover,
    /// `M(γ, N)` after duplicate collapsing.
    RandomLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub n: usize,
    pub gamma: f64,
    pub margin: f64,
    pub ln_margin: f64,
    pub bound: f64,
    pub ln_bound: f64,
    /// Smallest `σ(x)(aᵀΦ(x) + c)` in units of `‖a‖`; at least `1/‖a‖` when the recursion holds.
    pub min_raw_value: f64,
    /// Points with non-positive slack, positives first.
    pub violations: Vec<usize>,
    pub passed: bool,
}

fn margin_report(
    mode: VerifyMode,
    n: usize,
    gamma: f64,
    radius: f64,
    slacks: &[f64],
    weight_norm: f64,
) -> Result<VerificationReport> {
    let bound = match mode {
        VerifyMode::Finite => bounds::certified_margin_bound(gamma, n, radius)?,
        VerifyMode::Cover => bounds::certified_margin_bound(gamma / 2.0, n, radius)?,
        VerifyMode::RandomLayer => bounds::margin_bound(gamma, n, radius)?,
    };
    let margin = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    let violations: Vec<usize> = slacks
        .iter()
        .enumerate()
        .filter(|(_, s)| !(**s > 0.0))
        .map(|(i, _)| i)
        .collect();
    let ln_margin = if margin > 0.0 { margin.ln() } else { f64::NEG_INFINITY };
    let passed = violations.is_empty() && ln_margin >= bound.ln_value - 1e-9 * bound.ln_value.abs().max(1.0);
    Ok(VerificationReport {
        mode,
        n,
        gamma,
        margin,
        ln_margin,
        bound: bound.value,
        ln_bound: bound.ln_value,
        min_raw_value: margin * weight_norm,
        violations,
        passed,
    })
}

/// Recomputes every slack of `cert` over `ds` and compares the margin with the mode's bound.
///
/// `N` in the bound is the layer width (number of ordered points or centers).
pub fn verify_separation<T: Scalar>(
    layer: &DetLayer<T>,
    cert: &SeparationCertificate<T>,
    ds: &LabeledDataset<T>,
    mode: VerifyMode,
) -> Result<VerificationReport> {
    if cert.weights.len() != layer.width() {
        return Err(Error::DimensionMismatch {
            expected: layer.width(),
            found: cert.weights.len(),
        });
    }
    let (features, signs): (Vec<Vec<T>>, Vec<Sign>) = ds.iter_signed().map(|(s, _, x)| (layer.features(x), s)).unzip();
    let slacks = normalized_slacks(&cert.weights, cert.offset, &features, &signs)?;
    let slacks: Vec<f64> = slacks.into_iter().map(Scalar::as_f64).collect();
    margin_report(
        mode,
        layer.width(),
        layer.gamma.as_f64(),
        layer.radius.as_f64(),
        &slacks,
        stable_norm(&cert.weights).as_f64(),
    )
}

/// Separation of a random layer via node assignment and duplicate collapsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct RandomLayerCertificate<T> {
    /// Node chosen for each ordered point.
    pub assignment: Vec<usize>,
    pub ordered: OrderedPoints<T>,
    /// Weights on the duplicated system, one per ordered point.
    pub raw_weights: Vec<T>,
    pub certificate: SeparationCertificate<T>,
    pub report: VerificationReport,
}

/// First node of `layer` whose hyperplane serves ordered point `i` with slack `gamma`.
pub fn find_node_for_point<T: Scalar>(
    layer: &ReluLayer<T>,
    ordered: &OrderedPoints<T>,
    i: usize,
    gamma: T,
    radius: T,
) -> Option<usize> {
    let tol = check_tol(radius);
    let xi = &ordered.entries[i].point;
    let lower: Vec<&[T]> = ordered.lower_opposite(i).map(|j| ordered.entries[j].point.as_slice()).collect();
    (0..layer.width()).find(|&l| {
        if layer.affine(l, xi) < gamma - tol {
            return false;
        }
        if lower.is_empty() {
            layer.bias()[l] - radius * vecops::norm(layer.row(l)) <= tol
        } else {
            lower.iter().all(|x| layer.affine(l, x) <= -gamma + tol)
        }
    })
}

/// Certifies that an unnormalized random layer separates `ds`, or returns `None`
/// when some point has no serving node.
pub fn certify_random_layer<T: Scalar>(
    layer: &ReluLayer<T>,
    ds: &LabeledDataset<T>,
    gamma: T,
) -> Result<Option<RandomLayerCertificate<T>>> {
    if layer.normalized() {
        return Err(Error::InvalidConfig("random-layer certification expects an unnormalized layer".into()));
    }
    if layer.input_dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            found: layer.input_dim(),
        });
    }
    let ordered = norm_order(ds);
    let radius = ds.radius();
    let mut assignment = Vec::with_capacity(ordered.len());
    for i in 0..ordered.len() {
        match find_node_for_point(layer, &ordered, i, gamma, radius) {
            Some(l) => assignment.push(l),
            None => return Ok(None),
        }
    }
    let phi: Vec<Vec<T>> = ordered
        .entries
        .iter()
        .map(|e| crate::rinn::forward(layer, &e.point))
        .collect::<Result<_>>()?;
    let dup: Vec<Vec<T>> = phi
        .iter()
        .map(|f| assignment.iter().map(|&l| f[l]).collect())
        .collect();
    let signs: Vec<Sign> = ordered.entries.iter().map(|e| e.sign).collect();
    let raw_weights = backward_weights(&dup, &signs, gamma)?;
    let collapsed = collapse_duplicates(&assignment, &raw_weights, layer.width())?;
    let certificate = certificate_from(collapsed, &phi, &signs)?;
    let slacks: Vec<f64> = certificate.slacks.iter().map(|s| s.as_f64()).collect();
    let report = margin_report(
        VerifyMode::RandomLayer,
        ordered.len(),
        gamma.as_f64(),
        radius.as_f64(),
        &slacks,
        stable_norm(&certificate.weights).as_f64(),
    )?;
    Ok(Some(RandomLayerCertificate {
        assignment,
        ordered,
        raw_weights,
        certificate,
        report,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrderedEntry;
    use approx::assert_relative_eq;

    fn ordered(entries: &[(&[f64], Sign)]) -> OrderedPoints<f64> {
        OrderedPoints {
            entries: entries
                .iter()
                .enumerate()
                .map(|(k, (p, s))| OrderedEntry {
                    point: p.to_vec(),
                    sign: *s,
                    index: k,
                })
                .collect(),
        }
    }

    fn opts() -> FallbackOptions {
        FallbackOptions {
            lambda: 1.0,
            max_attempts: 10_000,
            seed: 0,
            force_rejection: false,
        }
    }

    #[test]
    fn interval_midpoint_example() {
        let o = ordered(&[(&[1.0, 0.0], Sign::Pos), (&[0.0, 0.5], Sign::Neg)]);
        let (h, w) = find_hyperplane_for_point(0, &o, 0.05, 1.0, &opts()).unwrap();
        assert_eq!(h.normal, vec![1.0, 0.0]);
        assert_relative_eq!(h.offset, -0.5, max_relative = 1e-15);
        assert_relative_eq!(h.eval(&[1.0, 0.0]), 0.5);
        assert_relative_eq!(h.eval(&[0.0, 0.5]), -0.5);
        assert!(w.is_none());
    }

    #[test]
    fn unconstrained_point_gets_witness() {
        let o = ordered(&[(&[1.0, 0.0], Sign::Pos)]);
        let (h, w) = find_hyperplane_for_point(0, &o, 0.05, 1.0, &opts()).unwrap();
        assert_eq!(h.normal, vec![1.0, 0.0]);
        assert_eq!(h.offset, 0.0);
        assert_eq!(h.eval(&[1.0, 0.0]), 1.0);
        let w = w.unwrap();
        assert_eq!(h.eval(&w), -1.0);
    }

    #[test]
    fn origin_rule() {
        let o = ordered(&[(&[0.0, 0.0], Sign::Pos)]);
        let (h, w) = find_hyperplane_for_point(0, &o, 0.1, 1.0, &opts()).unwrap();
        assert_eq!(h.normal, vec![1.0, 0.0]);
        assert_eq!(h.offset, 0.1);
        assert!(h.eval(&w.unwrap()) <= 0.0);
    }

    #[test]
    fn two_point_layer() {
        let ds = LabeledDataset::new(vec![vec![1.0, 0.0]], vec![vec![0.5, 0.0]]).unwrap();
        assert_eq!(ds.delta(), 0.5);
        let gamma = bounds::gamma_finite(ds.delta(), ds.radius(), 2).unwrap();
        assert_eq!(gamma, 1.0 / 64.0);
        let layer = build_deterministic_layer(&ds, gamma).unwrap();
        assert_eq!(layer.width(), 2);
        layer.check_invariant().unwrap();
        let h1 = &layer.hyperplanes[0];
        assert!(h1.eval(&[1.0, 0.0]) >= gamma);
        assert!(h1.eval(&[0.5, 0.0]) <= -gamma);
        let cert = build_separating_weights(&layer, &ds).unwrap();
        let rep = verify_separation(&layer, &cert, &ds, VerifyMode::Finite).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_relative_eq!(
            rep.bound,
            2f64.sqrt() * bounds::margin_bound(gamma, 2, 1.0).unwrap().value,
            max_relative = 1e-12
        );
    }

    #[test]
    fn hand_recursion_example() {
        let feats = vec![vec![0.5, 0.2], vec![0.0, 0.5]];
        let a = backward_weights(&feats, &[Sign::Pos, Sign::Neg], 0.5).unwrap();
        assert_relative_eq!(a[1], -2.0);
        assert_relative_eq!(a[0], 2.8, max_relative = 1e-15);
        assert_relative_eq!(vecops::dot(&a, &feats[0]), 1.0, max_relative = 1e-15);
        assert_relative_eq!(vecops::dot(&a, &feats[1]), -1.0, max_relative = 1e-15);
    }

    #[test]
    fn single_point_base_case() {
        let ds = LabeledDataset::new(vec![vec![0.6, 0.8]], vec![]).unwrap();
        let gamma = 0.1;
        let layer = build_deterministic_layer(&ds, gamma).unwrap();
        let cert = build_separating_weights(&layer, &ds).unwrap();
        assert_relative_eq!(cert.weights[0], 1.0 / gamma);
        let phi = layer.features(&[0.6, 0.8])[0];
        assert_relative_eq!(cert.margin, phi);
        assert!(cert.margin >= gamma);
        let rep = verify_separation(&layer, &cert, &ds, VerifyMode::Finite).unwrap();
        assert!(rep.passed);
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_duplicates(&[2, 0], &[1.5, -3.0], 3).unwrap(), vec![-3.0, 0.0, 1.5]);
        let c = collapse_duplicates(&[1, 1], &[2.8, -2.0], 2).unwrap();
        assert_relative_eq!(c[1], 0.8, max_relative = 1e-14);
        assert!(collapse_duplicates(&[5], &[1.0], 2).is_err());
        assert!(collapse_duplicates(&[0, 1], &[1.0], 2).is_err());
    }

    #[test]
    fn rejection_path_produces_valid_layer() {
        let ds = LabeledDataset::new(vec![vec![1.0, 0.0], vec![0.0, -0.9]], vec![vec![-1.0, 0.0]]).unwrap();
        let gamma = bounds::gamma_finite(ds.delta(), ds.radius(), 2).unwrap();
        let mut o = FallbackOptions::for_dataset(&ds, 3);
        o.force_rejection = true;
        let layer = build_deterministic_layer_with(&ds, gamma, &o).unwrap();
        assert!(layer.hyperplanes.iter().all(|h| h.source == HyperplaneSource::RejectionSample));
        layer.check_invariant().unwrap();
        let cert = build_separating_weights(&layer, &ds).unwrap();
        assert!(verify_separation(&layer, &cert, &ds, VerifyMode::Finite).unwrap().passed);
    }

    #[test]
    fn impossible_gamma_reports_failure() {
        let o = ordered(&[(&[1.0, 0.0], Sign::Pos), (&[0.9, 0.0], Sign::Neg)]);
        let mut f = opts();
        f.max_attempts = 200;
        match find_hyperplane_for_point(0, &o, 0.5, 1.0, &f) {
            Err(Error::NoHyperplaneFound { index: 0, attempts: 200, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tampered_layer_is_rejected() {
        let ds = LabeledDataset::new(vec![vec![1.0, 0.0]], vec![vec![0.5, 0.0]]).unwrap();
        let mut layer = build_deterministic_layer(&ds, 1.0 / 64.0).unwrap();
        layer.hyperplanes[0].offset = 0.0;
        assert!(matches!(build_separating_weights(&layer, &ds), Err(Error::InvalidLayer { index: 0, .. })));
    }

    #[test]
    fn default_attempt_cap() {
        assert_eq!(default_attempts(1.0 / 512.0), 5120);
        assert_eq!(default_attempts(1e-9), 1_000_000);
        assert_eq!(default_attempts(0.0), 1_000_000);
    }
}
