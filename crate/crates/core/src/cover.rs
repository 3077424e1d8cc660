//! Mutual covers: small δ-separated sets of centers whose balls cover both
//! classes, with radii limited by the squared distance to the other class.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::detnet::{self, DetLayer, FallbackOptions, SeparationCertificate, VerificationReport, VerifyMode};
use crate::error::{Error, Result};
use crate::geometry::{reorder, LabeledDataset, OrderedEntry, OrderedPoints, Sign};
use crate::scalar::{vecops, Scalar};
use crate::sep_check::simplex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct MutualCover<T> {
    pub centers_pos: Vec<Vec<T>>,
    pub centers_neg: Vec<Vec<T>>,
    pub radii_pos: Vec<T>,
    pub radii_neg: Vec<T>,
    /// Cluster of each positive point.
    pub membership_pos: Vec<usize>,
    /// Cluster of each negative point.
    pub membership_neg: Vec<usize>,
    pub mu: T,
}

impl<T: Scalar> MutualCover<T> {
    pub fn n_cover(&self) -> usize {
        self.centers_pos.len() + self.centers_neg.len()
    }

    pub fn centers(&self, s: Sign) -> &[Vec<T>] {
        match s {
            Sign::Pos => &self.centers_pos,
            Sign::Neg => &self.centers_neg,
        }
    }

    pub fn radii(&self, s: Sign) -> &[T] {
        match s {
            Sign::Pos => &self.radii_pos,
            Sign::Neg => &self.radii_neg,
        }
    }

    fn membership(&self, s: Sign) -> &[usize] {
        match s {
            Sign::Pos => &self.membership_pos,
            Sign::Neg => &self.membership_neg,
        }
    }

    pub fn max_radius(&self) -> T {
        self.radii_pos
            .iter()
            .chain(&self.radii_neg)
            .copied()
            .fold(T::zero(), T::max)
    }

    pub fn max_center_norm(&self) -> T {
        self.centers_pos
            .iter()
            .chain(&self.centers_neg)
            .map(|c| vecops::norm(c))
            .fold(T::zero(), T::max)
    }

    /// Centers in descending-norm order, each tagged with its class and cluster id.
    pub fn ordered_centers(&self) -> OrderedPoints<T> {
        let entries = [Sign::Pos, Sign::Neg]
            .into_iter()
            .flat_map(|s| {
                self.centers(s).iter().enumerate().map(move |(k, c)| OrderedEntry {
                    point: c.clone(),
                    sign: s,
                    index: k,
                })
            })
            .collect();
        reorder(&OrderedPoints { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CoverViolation {
    Uncovered { sign: Sign, point: usize, distance: f64, radius: f64 },
    BadMembership { sign: Sign, point: usize },
    EmptyCluster { sign: Sign, cluster: usize },
    CenterNotInHull { sign: Sign, cluster: usize, residual: f64 },
    RadiusRule { sign: Sign, cluster: usize, radius: f64, limit: f64 },
    Separation { pos_center: usize, neg_center: usize, distance: f64, delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub passed: bool,
    pub n_cover: usize,
    pub max_radius: f64,
    pub max_center_norm: f64,
    pub violations: Vec<CoverViolation>,
}

/// `μ = 8R²/γ`.
pub fn mu_for_gamma<T: Scalar>(gamma: T, radius: T) -> Result<T> {
    for (name, v) in [("gamma", gamma), ("radius", radius)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::NonPositiveInput { name, value: v.as_f64() });
        }
    }
    Ok(T::lit(8.0) * radius * radius / gamma)
}

fn min_dist_sq<T: Scalar>(c: &[T], others: &[Vec<T>]) -> T {
    others
        .iter()
        .map(|o| vecops::dist_sq(c, o))
        .fold(T::infinity(), T::min)
}

fn radius_limit<T: Scalar>(c: &[T], others: &[Vec<T>], mu: T) -> T {
    min_dist_sq(c, others) / mu
}

/// Residual of the best convex combination of `members` reproducing `c` (zero means `c` is in the hull).
fn hull_residual<T: Scalar>(c: &[T], members: &[&[T]]) -> f64 {
    if members.contains(&c) {
        return 0.0;
    }
    let d = c.len();
    let n = members.len();
    let scale = members
        .iter()
        .flat_map(|m| m.iter())
        .chain(c.iter())
        .fold(0.0f64, |s, v| s.max(v.as_f64().abs()))
        .max(f64::MIN_POSITIVE);
    let m = d + 1;
    let mut a = vec![0.0; m * n];
    for (j, x) in members.iter().enumerate() {
        for k in 0..d {
            a[k * n + j] = x[k].as_f64() / scale;
        }
        a[d * n + j] = 1.0;
    }
    let mut b: Vec<f64> = c.iter().map(|v| v.as_f64() / scale).collect();
    b.push(1.0);
    let r = simplex::phase1(&a, m, n, &b, 100_000, 1e-12);
    let total: f64 = r.x.iter().sum();
    if !(total > 0.0) {
        return f64::INFINITY;
    }
    let mut comb = vec![0.0; d];
    for (x, &l) in members.iter().zip(&r.x) {
        for k in 0..d {
            comb[k] += l / total * x[k].as_f64() / scale;
        }
    }
    let resid = comb.iter().zip(&b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    resid * scale
}

/// Checks coverage, hull membership, the radius rule and center separation.
///
/// Separation is measured against the dataset's own `δ`.
pub fn verify_mutual_cover<T: Scalar>(cover: &MutualCover<T>, ds: &LabeledDataset<T>) -> CoverReport {
    let mut violations = Vec::new();
    let hull_tol = 1e-9 * ds.radius().as_f64().max(1.0);
    for s in [Sign::Pos, Sign::Neg] {
        let pts = ds.points(s);
        let centers = cover.centers(s);
        let radii = cover.radii(s);
        let memb = cover.membership(s);
        let others = cover.centers(s.opposite());
        if memb.len() != pts.len() || radii.len() != centers.len() {
            for p in 0..pts.len().max(memb.len()) {
                violations.push(CoverViolation::BadMembership { sign: s, point: p });
            }
            continue;
        }
        let mut members: Vec<Vec<&[T]>> = vec![Vec::new(); centers.len()];
        for (p, (&k, x)) in memb.iter().zip(pts).enumerate() {
            if k >= centers.len() {
                violations.push(CoverViolation::BadMembership { sign: s, point: p });
                continue;
            }
            members[k].push(x);
            let dist = vecops::dist(x, &centers[k]);
            if dist > radii[k] {
                violations.push(CoverViolation::Uncovered {
                    sign: s,
                    point: p,
                    distance: dist.as_f64(),
                    radius: radii[k].as_f64(),
                });
            }
        }
        for (k, c) in centers.iter().enumerate() {
            if members[k].is_empty() {
                violations.push(CoverViolation::EmptyCluster { sign: s, cluster: k });
                continue;
            }
            let residual = hull_residual(c, &members[k]);
            if !(residual <= hull_tol) {
                violations.push(CoverViolation::CenterNotInHull { sign: s, cluster: k, residual });
            }
            let limit = radius_limit(c, others, cover.mu);
            if !(radii[k] >= T::zero()) || radii[k] > limit {
                violations.push(CoverViolation::RadiusRule {
                    sign: s,
                    cluster: k,
                    radius: radii[k].as_f64(),
                    limit: limit.as_f64(),
                });
            }
        }
    }
    let delta = ds.delta();
    for (i, cp) in cover.centers_pos.iter().enumerate() {
        for (j, cn) in cover.centers_neg.iter().enumerate() {
            let dist = vecops::dist(cp, cn);
            if dist < delta {
                violations.push(CoverViolation::Separation {
                    pos_center: i,
                    neg_center: j,
                    distance: dist.as_f64(),
                    delta: delta.as_f64(),
                });
            }
        }
    }
    CoverReport {
        passed: violations.is_empty(),
        n_cover: cover.n_cover(),
        max_radius: cover.max_radius().as_f64(),
        max_center_norm: cover.max_center_norm().as_f64(),
        violations,
    }
}

#[derive(Clone)]
struct Cluster<T> {
    members: Vec<usize>,
    center: Vec<T>,
    radius: T,
}

fn make_cluster<T: Scalar>(members: Vec<usize>, pts: &[Vec<T>]) -> Cluster<T> {
    let d = pts[members[0]].len();
    let center = if members.len() == 1 {
        pts[members[0]].clone()
    } else {
        let inv = T::one() / T::from_usize_lossy(members.len());
        (0..d)
            .map(|k| members.iter().map(|&m| pts[m][k]).sum::<T>() * inv)
            .collect()
    };
    let radius = members
        .iter()
        .map(|&m| vecops::dist(&pts[m], &center))
        .fold(T::zero(), T::max);
    Cluster { members, center, radius }
}

fn singletons<T: Scalar>(pts: &[Vec<T>]) -> Vec<Cluster<T>> {
    (0..pts.len()).map(|i| make_cluster(vec![i], pts)).collect()
}

/// Whether replacing clusters `a` and `b` of one class by `merged` keeps every rule.
fn merge_is_valid<T: Scalar>(merged: &Cluster<T>, others: &[Cluster<T>], other_centers: &[Vec<T>], mu: T, delta: T) -> bool {
    if other_centers.iter().any(|o| vecops::dist(&merged.center, o) < delta) {
        return false;
    }
    if merged.radius > radius_limit(&merged.center, other_centers, mu) {
        return false;
    }
    // The new center may tighten the limits of the other class.
    others
        .iter()
        .all(|o| o.radius <= vecops::dist_sq(&o.center, &merged.center) / mu)
}

fn agglomerate<T: Scalar>(
    own: &mut Vec<Cluster<T>>,
    other: &[Cluster<T>],
    pts: &[Vec<T>],
    mu: T,
    delta: T,
) -> bool {
    let other_centers: Vec<Vec<T>> = other.iter().map(|c| c.center.clone()).collect();
    let mut pairs: Vec<(T, usize, usize)> = Vec::new();
    for a in 0..own.len() {
        for b in a + 1..own.len() {
            pairs.push((vecops::dist_sq(&own[a].center, &own[b].center), a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    for (_, a, b) in pairs {
        let mut members = own[a].members.clone();
        members.extend(&own[b].members);
        members.sort_unstable();
        let merged = make_cluster(members, pts);
        if merge_is_valid(&merged, other, &other_centers, mu, delta) {
            own[a] = merged;
            own.remove(b);
            return true;
        }
    }
    false
}

fn assemble<T: Scalar>(pos: &[Cluster<T>], neg: &[Cluster<T>], ds: &LabeledDataset<T>, mu: T) -> MutualCover<T> {
    let membership = |cl: &[Cluster<T>], n: usize| {
        let mut m = vec![0usize; n];
        for (k, c) in cl.iter().enumerate() {
            for &p in &c.members {
                m[p] = k;
            }
        }
        m
    };
    MutualCover {
        centers_pos: pos.iter().map(|c| c.center.clone()).collect(),
        centers_neg: neg.iter().map(|c| c.center.clone()).collect(),
        radii_pos: pos.iter().map(|c| c.radius).collect(),
        radii_neg: neg.iter().map(|c| c.radius).collect(),
        membership_pos: membership(pos, ds.points_pos().len()),
        membership_neg: membership(neg, ds.points_neg().len()),
        mu,
    }
}

/// Greedy same-class agglomeration with centroid centers.
///
/// The closest pair of same-class clusters whose merge keeps every rule is merged,
/// alternating between classes, until no merge is admissible. A final check
/// splits any violating cluster back into singletons; the all-singleton cover is
/// always valid, so construction cannot fail.
pub fn build_mutual_cover<T: Scalar>(ds: &LabeledDataset<T>, mu: T) -> Result<MutualCover<T>> {
    if !(mu > T::zero()) {
        return Err(Error::NonPositiveInput { name: "mu", value: mu.as_f64() });
    }
    let delta = ds.delta();
    let mut pos = singletons(ds.points_pos());
    let mut neg = singletons(ds.points_neg());
    loop {
        let a = agglomerate(&mut pos, &neg, ds.points_pos(), mu, delta);
        let b = agglomerate(&mut neg, &pos, ds.points_neg(), mu, delta);
        if !a && !b {
            break;
        }
    }
    loop {
        let cover = assemble(&pos, &neg, ds, mu);
        let report = verify_mutual_cover(&cover, ds);
        if report.passed {
            return Ok(cover);
        }
        let mut split_pos = vec![false; pos.len()];
        let mut split_neg = vec![false; neg.len()];
        for v in &report.violations {
            let (s, k) = match v {
                CoverViolation::CenterNotInHull { sign, cluster, .. }
                | CoverViolation::RadiusRule { sign, cluster, .. }
                | CoverViolation::EmptyCluster { sign, cluster } => (*sign, *cluster),
                CoverViolation::Uncovered { sign, point, .. } | CoverViolation::BadMembership { sign, point } => {
                    let m = if *sign == Sign::Pos { &cover.membership_pos } else { &cover.membership_neg };
                    (*sign, m.get(*point).copied().unwrap_or(0))
                }
                CoverViolation::Separation { pos_center, neg_center, .. } => {
                    split_neg[*neg_center] = true;
                    (Sign::Pos, *pos_center)
                }
            };
            match s {
                Sign::Pos => split_pos[k] = true,
                Sign::Neg => split_neg[k] = true,
            }
        }
        let split = |cl: Vec<Cluster<T>>, flags: &[bool], pts: &[Vec<T>]| -> Vec<Cluster<T>> {
            cl.into_iter()
                .zip(flags)
                .flat_map(|(c, &f)| {
                    if f && c.members.len() > 1 {
                        c.members.iter().map(|&m| make_cluster(vec![m], pts)).collect()
                    } else {
                        vec![c]
                    }
                })
                .collect()
        };
        let before = pos.len() + neg.len();
        pos = split(pos, &split_pos, ds.points_pos());
        neg = split(neg, &split_neg, ds.points_neg());
        if pos.len() + neg.len() == before {
            // Nothing left to split: fall back to the all-singleton cover.
            pos = singletons(ds.points_pos());
            neg = singletons(ds.points_neg());
        }
    }
}

/// Everything produced by the cover-based separation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct CoverPipeline<T> {
    pub gamma: T,
    pub cover: MutualCover<T>,
    pub cover_report: CoverReport,
    pub layer: DetLayer<T>,
    pub certificate: SeparationCertificate<T>,
    pub verification: VerificationReport,
}

/// Covers `ds` with `μ = 8R²/γ`, builds the deterministic layer on the centers and
/// checks that the resulting output hyperplane separates the original points.
pub fn cover_pipeline<T: Scalar>(ds: &LabeledDataset<T>, gamma: T) -> Result<CoverPipeline<T>> {
    ds.require_both_classes()?;
    let mu = mu_for_gamma(gamma, ds.radius())?;
    let cover = build_mutual_cover(ds, mu)?;
    let cover_report = verify_mutual_cover(&cover, ds);
    let ordered = cover.ordered_centers();
    let opts = FallbackOptions::for_dataset(ds, 0);
    let layer = detnet::build_layer_on_points(ordered, gamma, ds.radius(), &opts)?;
    let certificate = detnet::build_cover_weights(&layer, &cover.radii_pos, &cover.radii_neg, ds)?;
    let verification = detnet::verify_separation(&layer, &certificate, ds, VerifyMode::Cover)?;
    Ok(CoverPipeline {
        gamma,
        cover,
        cover_report,
        layer,
        certificate,
        verification,
    })
}

/// `γ = δ²/(8Rd)` for the dataset, the slack used by [`cover_pipeline`] by default.
pub fn default_gamma<T: Scalar>(ds: &LabeledDataset<T>) -> Result<T> {
    bounds::gamma_finite(ds.delta(), ds.radius(), ds.dim().max(2))
}
