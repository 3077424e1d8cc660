//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All geometry, bound and construction code is written against [`Scalar`],
//! which is implemented for `f32` and `f64`. Monte Carlo statistics are always
//! accumulated in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Absolute slack allowed on `>= gamma` / `<= -gamma` checks at unit scale.
    const CHECK_TOL: f64;
    /// Feasibility / optimality tolerance for the LP and SVM solvers on unit-scaled data.
    const SOLVER_TOL: f64;
    /// Tolerance on unit-norm checks for sampled or constructed normals.
    const UNIT_TOL: f64;

    /// Converts an `f64` literal. Panics only if the value is not representable at all.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }
}

impl Scalar for f64 {
    const CHECK_TOL: f64 = 1e-9;
    const SOLVER_TOL: f64 = 1e-9;
    const UNIT_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const CHECK_TOL: f64 = 1e-4;
    const SOLVER_TOL: f64 = 1e-5;
    const UNIT_TOL: f64 = 1e-5;
}

/// Dense vector helpers on slices.
pub mod vecops {
    use super::Scalar;

    #[inline]
    pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = T::zero();
        for (x, y) in a.iter().zip(b) {
            acc = acc + *x * *y;
        }
        acc
    }

    #[inline]
    pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
        dot(a, a)
    }

    #[inline]
    pub fn norm<T: Scalar>(a: &[T]) -> T {
        norm_sq(a).sqrt()
    }

    #[inline]
    pub fn dist_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = T::zero();
        for (x, y) in a.iter().zip(b) {
            let d = *x - *y;
            acc = acc + d * d;
        }
        acc
    }

    #[inline]
    pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
        dist_sq(a, b).sqrt()
    }

    pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
        a.iter().zip(b).map(|(x, y)| *x - *y).collect()
    }

    pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
        a.iter().map(|x| *x * s).collect()
    }

    /// Lexicographic comparison of coordinates; NaN-free inputs assumed.
    pub fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
        for (x, y) in a.iter().zip(b) {
            match x.partial_cmp(y) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        a.len().cmp(&b.len())
    }

    pub fn convert<T: Scalar, U: Scalar>(a: &[T]) -> Vec<U> {
        a.iter().map(|x| U::lit(x.as_f64())).collect()
    }
}
