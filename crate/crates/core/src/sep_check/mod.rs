//! Linear separability oracle with margin maximization.
//!
//! Separability is decided by a Farkas-type feasibility LP on the lifted points
//! `σ_i (x_i, 1)`: the sets are separable iff the origin is not a convex
//! combination of them. When infeasible, the LP duals give a separator. A
//! hard-margin SVM solved by SMO then pushes the margin toward the optimum.
//! Every reported separator is re-checked by evaluating all constraints
//! directly; solver flags are never trusted on their own.

pub mod exact2d;
pub mod simplex;
pub mod smo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{vecops, Scalar};

/// Largest problem (in points) handled by the exact low-dimensional fallback.
pub const EXACT_MAX_POINTS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeparationStatus {
    Separated,
    /// No separator was found. `certified` is set only when an exact search proved
    /// that none exists; otherwise this is not a proof of non-separability.
    NotSeparated { certified: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Lp,
    Smo,
    Exact,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct SeparatorResult<T> {
    pub status: SeparationStatus,
    /// Unit-norm normal `a` (empty when not separated).
    pub weights: Vec<T>,
    pub offset: T,
    /// `min σ(x)(aᵀx + c)/‖a‖`, zero when not separated.
    pub margin: T,
    /// Dual upper bound on the optimal margin, when the SVM stage ran.
    pub margin_upper_bound: Option<f64>,
    /// LP pivots plus SMO iterations.
    pub iterations: u64,
    /// `‖Σλ_i σ_i (x_i, 1)‖` for the LP's convex combination, in units of the data scale;
    /// near `1e-7` rather than zero because of the right-hand side perturbation.
    pub farkas_residual: Option<f64>,
    pub method: SolverMethod,
}

impl<T: Scalar> SeparatorResult<T> {
    pub fn is_separated(&self) -> bool {
        self.status == SeparationStatus::Separated
    }

    fn not_separated(certified: bool, iterations: u64, farkas_residual: Option<f64>) -> Self {
        Self {
            status: SeparationStatus::NotSeparated { certified },
            weights: Vec::new(),
            offset: T::zero(),
            margin: T::zero(),
            margin_upper_bound: None,
            iterations,
            farkas_residual,
            method: SolverMethod::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Cap on LP pivots and, separately, on SMO iterations.
    pub budget: u64,
    /// Run the SVM stage after the LP finds a separator.
    pub optimize_margin: bool,
    /// Use the exact search for `d <= 2` and at most [`EXACT_MAX_POINTS`] points.
    pub exact_fallback: bool,
    /// Multiclass only: stop at the first class that is not separated.
    pub early_exit: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            budget: 100_000,
            optimize_margin: true,
            exact_fallback: true,
            early_exit: false,
        }
    }
}

/// Points rescaled to unit max-abs coordinate, with a lazily built Gram matrix.
struct Prepared<'a, T> {
    raw: Vec<&'a [T]>,
    x: Vec<Vec<f64>>,
    scale: f64,
    dim: usize,
    gram: Option<Vec<f64>>,
}

impl<'a, T: Scalar> Prepared<'a, T> {
    fn new(raw: Vec<&'a [T]>) -> Result<Self> {
        let dim = raw.first().map(|p| p.len()).ok_or(Error::EmptyInput("separator points"))?;
        for p in &raw {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("separator points"));
            }
        }
        let m = raw
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
        let scale = if m > 0.0 { m } else { 1.0 };
        let x = raw
            .iter()
            .map(|p| p.iter().map(|v| v.as_f64() / scale).collect())
            .collect();
        Ok(Self {
            raw,
            x,
            scale,
            dim,
            gram: None,
        })
    }

    fn gram(&mut self) {
        if self.gram.is_none() {
            let n = self.x.len();
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = vecops::dot(&self.x[i], &self.x[j]);
                    g[i * n + j] = v;
                    g[j * n + i] = v;
                }
            }
            self.gram = Some(g);
        }
    }

    /// Separates points with `y > 0` from points with `y < 0`.
    fn solve(&mut self, y: &[f64], opts: &SolverOptions) -> SeparatorResult<T> {
        let mut iterations = 0u64;
        let mut best: Option<Candidate<T>> = None;

        let lp = farkas_lp(&self.x, y, self.dim, opts.budget);
        iterations += lp.pivots;
        if let Some((a, c)) = &lp.separator {
            best = pick(best, self.verify(a, *c, y, SolverMethod::Lp));
        }
        let lp_says_infeasible = lp.optimal && lp.separator.is_none();
        let lp_verified = best.is_some();

        let mut upper = None;
        if !lp_says_infeasible && (opts.optimize_margin || !lp_verified) {
            self.gram();
            let gram = self.gram.as_deref().unwrap_or_default();
            if let Some(s) = smo_separator(gram, &self.x, self.dim, y, opts.budget) {
                iterations += s.iterations;
                upper = s.upper.map(|u| u * self.scale);
                best = pick(best, self.verify(&s.w, s.c, y, SolverMethod::Smo));
            }
        }

        if best.is_none() && opts.exact_fallback && self.dim <= 2 && self.x.len() <= EXACT_MAX_POINTS {
            let (pos, neg): (Vec<Vec<f64>>, Vec<Vec<f64>>) = {
                let mut p = Vec::new();
                let mut n = Vec::new();
                for (xi, &yi) in self.x.iter().zip(y) {
                    if yi > 0.0 {
                        p.push(xi.clone());
                    } else {
                        n.push(xi.clone());
                    }
                }
                (p, n)
            };
            match exact2d::separate(&pos, &neg) {
                Some((u, c)) => best = pick(best, self.verify(&u, c, y, SolverMethod::Exact)),
                None => return SeparatorResult::not_separated(true, iterations, lp.residual),
            }
        }

        match best {
            Some(c) => SeparatorResult {
                status: SeparationStatus::Separated,
                weights: c.weights,
                offset: c.offset,
                margin: c.margin,
                margin_upper_bound: upper,
                iterations,
                farkas_residual: None,
                method: c.method,
            },
            None => SeparatorResult::not_separated(false, iterations, lp.residual),
        }
    }

    /// Maps a separator of the scaled data back, normalizes it and checks every constraint in `T`.
    fn verify(&self, a_scaled: &[f64], c: f64, y: &[f64], method: SolverMethod) -> Option<Candidate<T>> {
        let a64: Vec<f64> = a_scaled.iter().map(|v| v / self.scale).collect();
        let n = a64.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() || !c.is_finite() {
            return None;
        }
        let weights: Vec<T> = a64.iter().map(|v| T::lit(v / n)).collect();
        let offset = T::lit(c / n);
        let wn = vecops::norm(&weights);
        let mut margin = T::infinity();
        for (p, &yi) in self.raw.iter().zip(y) {
            let s = T::lit(yi.signum()) * (vecops::dot(&weights, p) + offset) / wn;
            if s < margin {
                margin = s;
            }
        }
        (margin > T::zero() && margin.is_finite()).then_some(Candidate {
            weights,
            offset,
            margin,
            method,
        })
    }
}

struct Candidate<T> {
    weights: Vec<T>,
    offset: T,
    margin: T,
    method: SolverMethod,
}

fn pick<T: Scalar>(a: Option<Candidate<T>>, b: Option<Candidate<T>>) -> Option<Candidate<T>> {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => {
            if b.margin > a.margin || (b.margin == a.margin && vecops::lex_cmp(&b.weights, &a.weights).is_lt()) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

struct LpOutcome {
    separator: Option<(Vec<f64>, f64)>,
    residual: Option<f64>,
    pivots: u64,
    optimal: bool,
}

/// Orthonormal basis of the lifted points `(x_i, 1)` and their coordinates in it.
fn lifted_basis(x: &[Vec<f64>], dim: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    for xi in x {
        let mut v: Vec<f64> = xi.iter().copied().chain(std::iter::once(1.0)).collect();
        let v_norm = vecops::norm(&v);
        let mut c = vec![0.0; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let p = vecops::dot(qk, &v);
                c[k] += p;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= p * qi;
                }
            }
        }
        let r = vecops::norm(&v);
        if r > 1e-10 * v_norm.max(1.0) {
            q.push(v.iter().map(|vi| vi / r).collect());
            c.push(r);
        }
        coords.push(c);
    }
    let rank = q.len();
    for c in coords.iter_mut() {
        c.resize(rank, 0.0);
    }
    debug_assert!(q.iter().all(|qk| qk.len() == dim + 1));
    (q, coords)
}

fn farkas_lp(x: &[Vec<f64>], y: &[f64], dim: usize, budget: u64) -> LpOutcome {
    const TOL: f64 = 1e-9;
    const PERTURB: f64 = 1e-7;
    let n = x.len();
    let reduce = dim + 1 > n;
    let (basis, coords): (Option<Vec<Vec<f64>>>, Vec<Vec<f64>>) = if reduce {
        let (q, c) = lifted_basis(x, dim);
        (Some(q), c)
    } else {
        (None, x.iter().map(|xi| xi.iter().copied().chain(std::iter::once(1.0)).collect()).collect())
    };
    let r = coords.first().map_or(0, Vec::len);
    let m = r + 1;
    let mut a = vec![0.0; m * n];
    for (i, (c, &yi)) in coords.iter().zip(y).enumerate() {
        let s = yi.signum();
        for k in 0..r {
            a[k * n + i] = s * c[k];
        }
        a[r * n + i] = 1.0;
    }
    // A tiny deterministic right-hand side perturbation breaks the heavy degeneracy
    // of the homogeneous rows; any separator is verified on the original data.
    let mut b: Vec<f64> = (0..m)
        .map(|k| PERTURB * (((k as f64 + 1.0) * 0.618_033_988_749_895).fract() - 0.5))
        .collect();
    b[r] = 1.0;
    let res = simplex::phase1(&a, m, n, &b, budget.min(usize::MAX as u64) as usize, TOL);
    let pivots = res.pivots as u64;
    // The duals depend only on the final basis, so `y_last` is the dual objective of
    // the unperturbed system: positive exactly when the duals certify a separator.
    if res.optimal && res.duals[r] > TOL {
        let u: Vec<f64> = match &basis {
            Some(q) => {
                let mut full = vec![0.0; dim + 1];
                for (k, qk) in q.iter().enumerate() {
                    for (f, v) in full.iter_mut().zip(qk) {
                        *f += res.duals[k] * v;
                    }
                }
                full
            }
            None => res.duals[..r].to_vec(),
        };
        let a_s: Vec<f64> = u[..dim].iter().map(|v| -v).collect();
        return LpOutcome {
            separator: Some((a_s, -u[dim])),
            residual: None,
            pivots,
            optimal: res.optimal,
        };
    }
    let total: f64 = res.x.iter().sum();
    let residual = (total > 0.0).then(|| {
        let mut acc = vec![0.0; dim + 1];
        for ((xi, &yi), &l) in x.iter().zip(y).zip(&res.x) {
            if l != 0.0 {
                let w = yi.signum() * l / total;
                for (k, v) in xi.iter().enumerate() {
                    acc[k] += w * v;
                }
                acc[dim] += w;
            }
        }
        vecops::norm(&acc)
    });
    LpOutcome {
        separator: None,
        residual,
        pivots,
        optimal: res.optimal,
    }
}

struct SmoOutcome {
    w: Vec<f64>,
    c: f64,
    upper: Option<f64>,
    iterations: u64,
}

fn smo_separator(gram: &[f64], x: &[Vec<f64>], dim: usize, y: &[f64], budget: u64) -> Option<SmoOutcome> {
    let mut state = smo::SmoState::new(y.len());
    let mut out = None;
    for eps in [1e-3, 1e-5, 1e-7, 1e-9] {
        let converged = smo::solve(gram, y, eps, budget, &mut state);
        let mut w = vec![0.0; dim];
        for ((xi, &yi), &a) in x.iter().zip(y).zip(&state.alpha) {
            if a != 0.0 {
                for (wk, v) in w.iter_mut().zip(xi) {
                    *wk += a * yi * v;
                }
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (xi, &yi) in x.iter().zip(y) {
            let s = vecops::dot(&w, xi);
            if yi > 0.0 {
                lo = lo.min(s);
            } else {
                hi = hi.max(s);
            }
        }
        let wn = vecops::norm(&w);
        let dual = state.dual_objective();
        let upper = (dual > 0.0).then(|| 1.0 / (2.0 * dual).sqrt());
        let margin = if wn > 0.0 { (lo - hi) / (2.0 * wn) } else { f64::NEG_INFINITY };
        out = Some(SmoOutcome {
            w,
            c: -(lo + hi) / 2.0,
            upper,
            iterations: state.iterations,
        });
        let tight = upper.is_some_and(|u| margin >= 0.99 * u);
        if !converged || tight {
            break;
        }
    }
    out
}

fn check_classes<T: Scalar>(pos: &[Vec<T>], neg: &[Vec<T>]) -> Result<()> {
    if pos.is_empty() {
        return Err(Error::EmptyClass("positive".into()));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass("negative".into()));
    }
    Ok(())
}

/// Maximum-margin separating hyperplane for `pos` vs `neg` with default options.
pub fn max_margin_separator<T: Scalar>(pos: &[Vec<T>], neg: &[Vec<T>], budget: u64) -> Result<SeparatorResult<T>> {
    max_margin_separator_with(
        pos,
        neg,
        &SolverOptions {
            budget,
            ..SolverOptions::default()
        },
    )
}

pub fn max_margin_separator_with<T: Scalar>(
    pos: &[Vec<T>],
    neg: &[Vec<T>],
    opts: &SolverOptions,
) -> Result<SeparatorResult<T>> {
    check_classes(pos, neg)?;
    let raw: Vec<&[T]> = pos.iter().chain(neg).map(Vec::as_slice).collect();
    let y: Vec<f64> = std::iter::repeat_n(1.0, pos.len())
        .chain(std::iter::repeat_n(-1.0, neg.len()))
        .collect();
    let mut prep = Prepared::new(raw)?;
    Ok(prep.solve(&y, opts))
}

/// One-vs-rest outcome for every class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct MulticlassResult<T> {
    pub separable: bool,
    /// In class order; shorter than the class count after an early exit.
    pub per_class: Vec<SeparatorResult<T>>,
    pub criterion: String,
}

impl<T: Scalar> MulticlassResult<T> {
    /// Smallest one-vs-rest margin when all classes are separated.
    pub fn min_margin(&self) -> Option<T> {
        self.separable
            .then(|| self.per_class.iter().map(|r| r.margin).fold(T::infinity(), T::min))
    }
}

/// True iff every class is linearly separable from the union of the others.
pub fn is_multiclass_separable<T: Scalar>(classes: &[Vec<Vec<T>>], opts: &SolverOptions) -> Result<MulticlassResult<T>> {
    if classes.is_empty() {
        return Err(Error::EmptyInput("classes"));
    }
    for (c, pts) in classes.iter().enumerate() {
        if pts.is_empty() {
            return Err(Error::EmptyClass(format!("class {c}")));
        }
    }
    let criterion = "one-vs-rest".to_string();
    if classes.len() == 1 {
        return Ok(MulticlassResult {
            separable: true,
            per_class: Vec::new(),
            criterion,
        });
    }
    let labels: Vec<usize> = classes.iter().enumerate().flat_map(|(c, p)| std::iter::repeat_n(c, p.len())).collect();
    let raw: Vec<&[T]> = classes.iter().flatten().map(Vec::as_slice).collect();
    let mut prep = Prepared::new(raw)?;
    let mut per_class = Vec::with_capacity(classes.len());
    let mut separable = true;
    for c in 0..classes.len() {
        let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
        let r = prep.solve(&y, opts);
        let ok = r.is_separated();
        per_class.push(r);
        if !ok {
            separable = false;
            if opts.early_exit {
                break;
            }
        }
    }
    Ok(MulticlassResult {
        separable,
        per_class,
        criterion,
    })
}

/// Slacks of a separator on a coordinate subset and of its zero-padded extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub subset: Vec<usize>,
    pub subset_margin: f64,
    pub padded_margin: f64,
    /// Every padded slack equals its subset slack exactly.
    pub bit_exact: bool,
    pub separated: bool,
    pub passed: bool,
}

/// `σ(aᵀx + c)/‖a‖` per point, positives first.
pub fn slacks<T: Scalar>(pos: &[Vec<T>], neg: &[Vec<T>], weights: &[T], offset: T) -> Vec<T> {
    let n = vecops::norm(weights);
    pos.iter()
        .map(|x| (vecops::dot(weights, x) + offset) / n)
        .chain(neg.iter().map(|x| -(vecops::dot(weights, x) + offset) / n))
        .collect()
}

/// Zero-pads a separator of the projection onto `coord_subset` and re-checks it on the full points.
///
/// `weights[k]` is the coefficient of coordinate `coord_subset[k]`. The subset is
/// processed in ascending order so both evaluations sum terms identically.
pub fn verify_projection_lemma<T: Scalar>(
    full_pos: &[Vec<T>],
    full_neg: &[Vec<T>],
    coord_subset: &[usize],
    weights: &[T],
    offset: T,
) -> Result<ProjectionReport> {
    check_classes(full_pos, full_neg)?;
    let d = full_pos[0].len();
    if coord_subset.len() != weights.len() {
        return Err(Error::InvalidSubset(format!(
            "{} coordinates for {} weights",
            coord_subset.len(),
            weights.len()
        )));
    }
    if coord_subset.is_empty() {
        return Err(Error::InvalidSubset("empty coordinate subset".into()));
    }
    let mut pairs: Vec<(usize, T)> = coord_subset.iter().copied().zip(weights.iter().copied()).collect();
    pairs.sort_by_key(|p| p.0);
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidSubset("repeated coordinate".into()));
    }
    if let Some(&(k, _)) = pairs.iter().find(|p| p.0 >= d) {
        return Err(Error::InvalidSubset(format!("coordinate {k} out of range for dimension {d}")));
    }
    for p in full_pos.iter().chain(full_neg) {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
    }
    let sub_w: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let project = |pts: &[Vec<T>]| -> Vec<Vec<T>> { pts.iter().map(|x| pairs.iter().map(|p| x[p.0]).collect()).collect() };
    let sub_slacks = slacks(&project(full_pos), &project(full_neg), &sub_w, offset);
    let mut padded = vec![T::zero(); d];
    for &(k, w) in &pairs {
        padded[k] = w;
    }
    let full_slacks = slacks(full_pos, full_neg, &padded, offset);
    let bit_exact = sub_slacks.iter().zip(&full_slacks).all(|(a, b)| a == b);
    let min = |v: &[T]| v.iter().copied().fold(T::infinity(), T::min).as_f64();
    let subset_margin = min(&sub_slacks);
    let padded_margin = min(&full_slacks);
    let separated = padded_margin > 0.0;
    Ok(ProjectionReport {
        subset: pairs.iter().map(|p| p.0).collect(),
        subset_margin,
        padded_margin,
        bit_exact,
        separated,
        passed: bit_exact && separated && subset_margin == padded_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric_pair() {
        let r = max_margin_separator(&[vec![1.0, 0.0]], &[vec![-1.0, 0.0]], 100_000).unwrap();
        assert!(r.is_separated());
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.weights[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(r.offset, 0.0, epsilon = 1e-9);
        assert_relative_eq!(r.margin, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn xor_cross_not_separated() {
        let pos = vec![vec![0.0, 1.0], vec![0.0, -1.0]];
        let neg = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let r = max_margin_separator(&pos, &neg, 100_000).unwrap();
        assert_eq!(r.status, SeparationStatus::NotSeparated { certified: true });
        let r = max_margin_separator_with(
            &pos,
            &neg,
            &SolverOptions {
                exact_fallback: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.status, SeparationStatus::NotSeparated { certified: false });
        assert!(r.farkas_residual.unwrap() < 1e-6);
    }

    #[test]
    fn midpoint_hyperplane() {
        let r = max_margin_separator(&[vec![2.0, 0.0]], &[vec![0.0, 0.0]], 100_000).unwrap();
        assert_relative_eq!(r.margin, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.offset, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn high_dimensional_few_points_uses_reduced_lp() {
        let d = 50;
        let mk = |k: usize, s: f64| {
            let mut v = vec![0.0; d];
            v[k] = s;
            v
        };
        let pos = vec![mk(0, 1.0), mk(1, 1.0), mk(2, 1.0)];
        let neg = vec![mk(3, 1.0), mk(4, 1.0)];
        let r = max_margin_separator(&pos, &neg, 100_000).unwrap();
        assert!(r.is_separated());
        let s = slacks(&pos, &neg, &r.weights, r.offset);
        assert!(s.iter().all(|&v| v >= r.margin * (1.0 - 1e-12)));
    }

    #[test]
    fn multiclass_examples() {
        let line = vec![vec![vec![0.0, 0.0]], vec![vec![5.0, 0.0]], vec![vec![10.0, 0.0]]];
        assert!(!is_multiclass_separable(&line, &SolverOptions::default()).unwrap().separable);
        let tri = vec![
            vec![vec![0.0, 0.0], vec![0.01, 0.0]],
            vec![vec![1.0, 0.0], vec![1.0, 0.01]],
            vec![vec![0.5, 0.8], vec![0.5, 0.81]],
        ];
        assert!(is_multiclass_separable(&tri, &SolverOptions::default()).unwrap().separable);
        assert!(is_multiclass_separable(&[vec![vec![1.0]]], &SolverOptions::default()).unwrap().separable);
        assert!(is_multiclass_separable::<f64>(&[vec![vec![1.0]], vec![]], &SolverOptions::default()).is_err());
    }

    #[test]
    fn projection_examples() {
        let pos = vec![vec![1.0, 0.3], vec![2.0, -0.7]];
        let neg = vec![vec![-1.0, 0.2], vec![-0.5, 5.0]];
        let r = verify_projection_lemma(&pos, &neg, &[0], &[1.0], 0.0).unwrap();
        assert!(r.passed && r.bit_exact);
        assert_eq!(r.subset_margin, 0.5);
        let all = verify_projection_lemma(&pos, &neg, &[1, 0], &[0.0, 1.0], 0.0).unwrap();
        assert!(all.passed);
        assert!(verify_projection_lemma(&pos, &neg, &[0, 0], &[1.0, 1.0], 0.0).is_err());
        assert!(verify_projection_lemma(&pos, &neg, &[2], &[1.0], 0.0).is_err());
    }
}
