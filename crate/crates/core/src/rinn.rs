//! Randomly initialized ReLU layers.
//!
//! A layer stores `W` row-major with its bias. Each row is drawn from one
//! ChaCha8 stream as `d` normals followed by one uniform bias, so the first `m`
//! rows of a width-`n` layer equal the width-`m` layer with the same seed.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{vecops, Scalar};
use crate::seeding;

/// Row distribution of `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDist {
    /// i.i.d. standard normal entries.
    GaussianRows,
    /// Rows uniform on the unit sphere.
    UnitSphereRows,
    /// Weights supplied directly.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct ReluLayer<T> {
    weights: Vec<T>,
    bias: Vec<T>,
    n: usize,
    d: usize,
    dist: WeightDist,
    lambda: T,
    normalized: bool,
    seed: u64,
}

impl<T: Scalar> ReluLayer<T> {
    /// Builds a layer from explicit `W` (row-major, `n×d`) and `b`.
    pub fn from_parts(weights: Vec<T>, bias: Vec<T>, d: usize, normalized: bool) -> Result<Self> {
        let n = bias.len();
        if n == 0 || d == 0 {
            return Err(Error::InvalidShape(format!("layer must be non-empty (n = {n}, d = {d})")));
        }
        if weights.len() != n * d {
            return Err(Error::InvalidShape(format!(
                "weights have {} entries, expected {n}×{d}",
                weights.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        let lambda = bias.iter().fold(T::zero(), |m, b| m.max(b.abs()));
        Ok(Self {
            weights,
            bias,
            n,
            d,
            dist: WeightDist::Explicit,
            lambda,
            normalized,
            seed: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn dist(&self) -> WeightDist {
        self.dist
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.weights[i * self.d..(i + 1) * self.d]
    }

    /// Pre-activation `w_iᵀx + b_i` of node `i`.
    #[inline]
    pub fn affine(&self, i: usize, x: &[T]) -> T {
        vecops::dot(self.row(i), x) + self.bias[i]
    }

    /// Output scale: `√(2/n)` when normalized, else 1.
    pub fn output_scale(&self) -> T {
        if self.normalized {
            (T::lit(2.0) / T::from_usize_lossy(self.n)).sqrt()
        } else {
            T::one()
        }
    }

    /// The first `m` nodes of this layer.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n {
            return Err(Error::InvalidShape(format!("cannot truncate width {} to {m}", self.n)));
        }
        Ok(Self {
            weights: self.weights[..m * self.d].to_vec(),
            bias: self.bias[..m].to_vec(),
            n: m,
            ..self.clone()
        })
    }

    /// Same weights with a different normalization flag.
    pub fn with_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    /// Regeneration recipe; `None` for explicit layers.
    pub fn spec(&self) -> Option<LayerSpec> {
        (self.dist != WeightDist::Explicit).then(|| LayerSpec {
            dist: self.dist,
            n: self.n,
            d: self.d,
            lambda: self.lambda.as_f64(),
            seed: self.seed,
            normalized: self.normalized,
        })
    }
}

/// Draws an `n×d` layer with rows from `dist` and biases uniform on `[−λ, λ]`.
pub fn sample_layer<T: Scalar>(
    d: usize,
    n: usize,
    lambda: T,
    dist: WeightDist,
    normalized: bool,
    seed: u64,
) -> Result<ReluLayer<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidShape(format!("layer must be non-empty (n = {n}, d = {d})")));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidShape(format!("lambda must be a finite non-negative number, got {lambda}")));
    }
    if dist == WeightDist::Explicit {
        return Err(Error::InvalidShape("explicit layers are built with from_parts".into()));
    }
    let mut rng = seeding::rng(seed);
    let lam = lambda.as_f64();
    let mut weights = Vec::with_capacity(n * d);
    let mut bias = Vec::with_capacity(n);
    let mut row = vec![0.0f64; d];
    for _ in 0..n {
        loop {
            for r in row.iter_mut() {
                *r = StandardNormal.sample(&mut rng);
            }
            if dist == WeightDist::GaussianRows {
                break;
            }
            let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm > 0.0 {
                row.iter_mut().for_each(|v| *v /= nrm);
                break;
            }
        }
        weights.extend(row.iter().map(|&v| T::lit(v)));
        let u: f64 = rng.random::<f64>();
        bias.push(T::lit(lam * (2.0 * u - 1.0)));
    }
    Ok(ReluLayer {
        weights,
        bias,
        n,
        d,
        dist,
        lambda,
        normalized,
        seed,
    })
}

/// Writes `ReLU(Wx + b)` (times `√(2/n)` if normalized) into `out`.
pub fn forward_into<T: Scalar>(layer: &ReluLayer<T>, x: &[T], out: &mut [T]) -> Result<()> {
    if x.len() != layer.d {
        return Err(Error::DimensionMismatch {
            expected: layer.d,
            found: x.len(),
        });
    }
    if out.len() != layer.n {
        return Err(Error::DimensionMismatch {
            expected: layer.n,
            found: out.len(),
        });
    }
    let s = layer.output_scale();
    for (i, o) in out.iter_mut().enumerate() {
        let z = layer.affine(i, x);
        *o = if z > T::zero() { z * s } else { T::zero() };
    }
    Ok(())
}

pub fn forward<T: Scalar>(layer: &ReluLayer<T>, x: &[T]) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); layer.n];
    forward_into(layer, x, &mut out)?;
    Ok(out)
}

/// Maps every point through the layer.
pub fn forward_all<T: Scalar>(layer: &ReluLayer<T>, points: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    points.iter().map(|x| forward(layer, x)).collect()
}

/// `layer2(layer1(x))`.
pub fn forward_two<T: Scalar>(layer1: &ReluLayer<T>, layer2: &ReluLayer<T>, x: &[T]) -> Result<Vec<T>> {
    if layer2.d != layer1.n {
        return Err(Error::DimensionMismatch {
            expected: layer1.n,
            found: layer2.d,
        });
    }
    forward(layer2, &forward(layer1, x)?)
}

/// `λ̂ = √(R² + λ²/3)`, the second-layer bias scale matched to first-layer output norms.
pub fn lambda_hat<T: Scalar>(radius: T, lambda: T) -> T {
    (radius * radius + lambda * lambda / T::lit(3.0)).sqrt()
}

/// Per-point relative deviation of `‖Φ(x)‖²` from `‖x‖² + λ²/3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormPreservationReport {
    pub deviations: Vec<f64>,
    pub tolerance: f64,
    pub fraction_within: f64,
    pub max_deviation: f64,
}

pub fn norm_preservation_check<T: Scalar>(
    layer: &ReluLayer<T>,
    points: &[Vec<T>],
    tolerance: f64,
) -> Result<NormPreservationReport> {
    if !layer.normalized {
        return Err(Error::InvalidConfig("norm preservation applies to normalized layers".into()));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput("norm_preservation_check points"));
    }
    let lam = layer.lambda.as_f64();
    let deviations = points
        .iter()
        .map(|x| {
            let phi = forward(layer, x)?;
            let got = vecops::norm_sq(&phi).as_f64();
            let want = vecops::norm_sq(x).as_f64() + lam * lam / 3.0;
            Ok(if want > 0.0 {
                (got - want).abs() / want
            } else if got == 0.0 {
                0.0
            } else {
                f64::INFINITY
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let within = deviations.iter().filter(|&&v| v < tolerance).count();
    Ok(NormPreservationReport {
        fraction_within: within as f64 / deviations.len() as f64,
        max_deviation: deviations.iter().cloned().fold(0.0, f64::max),
        deviations,
        tolerance,
    })
}

/// JSON recipe that regenerates a sampled layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub dist: WeightDist,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub seed: u64,
    pub normalized: bool,
}

impl LayerSpec {
    pub fn build<T: Scalar>(&self) -> Result<ReluLayer<T>> {
        sample_layer(self.d, self.n, T::lit(self.lambda), self.dist, self.normalized, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_lambda_gives_zero_bias() {
        let l = sample_layer::<f64>(3, 50, 0.0, WeightDist::GaussianRows, false, 4).unwrap();
        assert!(l.bias().iter().all(|&b| b == 0.0));
    }

    #[test]
    fn sphere_rows_are_unit() {
        for seed in 0..5 {
            let l = sample_layer::<f64>(7, 40, 1.0, WeightDist::UnitSphereRows, false, seed).unwrap();
            for i in 0..l.width() {
                assert!((vecops::norm(l.row(i)) - 1.0).abs() < 1e-12);
            }
            assert!(l.bias().iter().all(|b| b.abs() <= 1.0));
        }
    }

    #[test]
    fn gaussian_entry_moments() {
        let l = sample_layer::<f64>(10, 10_000, 1.0, WeightDist::GaussianRows, false, 11).unwrap();
        let w = l.weights();
        let m = w.iter().sum::<f64>() / w.len() as f64;
        let v = w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (w.len() - 1) as f64;
        assert!(m.abs() < 4.0 / (1e5f64).sqrt());
        assert!((v - 1.0).abs() < 0.05);
    }

    #[test]
    fn forward_examples() {
        let l = ReluLayer::from_parts(vec![1.0, 0.0], vec![0.0], 2, true).unwrap();
        assert_relative_eq!(forward(&l, &[1.0, 0.0]).unwrap()[0], 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(forward(&l, &[-1.0, 0.0]).unwrap(), vec![0.0]);
        assert!(forward(&l, &[1.0]).is_err());

        let n = 8;
        let ln = sample_layer::<f64>(3, n, 1.0, WeightDist::GaussianRows, true, 5).unwrap();
        let lu = ln.clone().with_normalized(false);
        let x = [0.3, -1.2, 0.7];
        let a = forward(&ln, &x).unwrap();
        let b = forward(&lu, &x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_relative_eq!(p * (n as f64 / 2.0).sqrt(), *q, max_relative = 1e-14);
        }
    }

    #[test]
    fn forward_two_identity_like() {
        let n = 6;
        let l1 = sample_layer::<f64>(2, n, 1.0, WeightDist::GaussianRows, true, 9).unwrap();
        let s = (n as f64 / 2.0).sqrt();
        let mut w2 = vec![0.0; n * n];
        for i in 0..n {
            w2[i * n + i] = s;
        }
        let l2 = ReluLayer::from_parts(w2, vec![0.0; n], n, true).unwrap();
        let x = [0.4, -0.9];
        let direct = forward(&l1, &x).unwrap();
        let two = forward_two(&l1, &l2, &x).unwrap();
        for (a, b) in direct.iter().zip(&two) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
        let z1 = sample_layer::<f64>(2, n, 0.0, WeightDist::GaussianRows, true, 1).unwrap();
        let z2 = sample_layer::<f64>(n, n, 0.0, WeightDist::GaussianRows, true, 2).unwrap();
        assert!(forward_two(&z1, &z2, &[0.0, 0.0]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lambda_hat_examples() {
        assert_eq!(lambda_hat(0.0, 0.0), 0.0);
        assert_relative_eq!(lambda_hat(1.0, 3f64.sqrt()), 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(lambda_hat(2.5, 2.5), 2.5 * (4.0f64 / 3.0).sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn prefix_rows_match_narrower_layer() {
        let wide = sample_layer::<f64>(4, 30, 2.0, WeightDist::UnitSphereRows, true, 77).unwrap();
        let narrow = sample_layer::<f64>(4, 12, 2.0, WeightDist::UnitSphereRows, true, 77).unwrap();
        let t = wide.truncated(12).unwrap();
        assert_eq!(t.weights(), narrow.weights());
        assert_eq!(t.bias(), narrow.bias());
    }

    #[test]
    fn spec_regenerates_bit_identically() {
        let l = sample_layer::<f32>(5, 9, 1.5, WeightDist::GaussianRows, false, 123).unwrap();
        let json = serde_json::to_string(&l.spec().unwrap()).unwrap();
        let spec: LayerSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec.build::<f32>().unwrap(), l);
    }

    #[test]
    fn norm_preservation_at_origin() {
        let l = sample_layer::<f64>(2, 100, 0.0, WeightDist::GaussianRows, true, 3).unwrap();
        let r = norm_preservation_check(&l, &[vec![0.0, 0.0]], 0.1).unwrap();
        assert_eq!(r.deviations, vec![0.0]);
    }
}
