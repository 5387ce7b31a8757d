//! The scalar abstraction shared by every module.
//!
//! Two regimes exist: exact rationals (`BigRational`) for algebraic identities
//! and IEEE floats (`f64`, `f32`) for sampling and optimization. Code that is
//! generic over [`Scalar`] branches on [`Scalar::EXACT`] only where the two
//! regimes genuinely differ (zero tests, canonical scaling, determinant and
//! rank kernels). Moving between regimes is always explicit, via
//! [`Scalar::to_f64`] or [`crate::Matrix::to_f64`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, Num, One, Signed, ToPrimitive, Zero};

use super::linalg;

/// Comparison tolerance used in the float regime. Ignored when the scalar is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    /// A tolerance with identical relative and absolute parts.
    pub const fn uniform(tol: f64) -> Self {
        Self { rel: tol, abs: tol }
    }

    /// Whether `value` counts as zero relative to a magnitude `scale`.
    pub fn is_zero<T: Scalar>(&self, value: &T, scale: f64) -> bool {
        if T::EXACT {
            value.is_zero()
        } else {
            value.to_f64().abs() <= self.abs.max(self.rel * scale.abs())
        }
    }

    pub fn eq<T: Scalar>(&self, a: &T, b: &T) -> bool {
        if T::EXACT {
            a == b
        } else {
            let scale = a.to_f64().abs().max(b.to_f64().abs());
            self.is_zero(&(a.clone() - b.clone()), scale)
        }
    }

    /// Threshold against which an already-computed nonnegative residual is judged.
    pub fn admits(&self, residual: f64, scale: f64) -> bool {
        residual <= self.abs.max(self.rel * scale.abs())
    }
}

/// A field element usable throughout the crate.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// True when arithmetic is exact and zero tests need no tolerance.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer) / Self::from_i64(denom)
    }

    fn to_f64(&self) -> f64;

    fn default_tolerance() -> Tolerance {
        Tolerance::default()
    }

    /// Determinant of an `n x n` row-major block.
    fn det_kernel(n: usize, entries: Vec<Self>) -> Self;

    /// Rank of a `rows x cols` row-major block.
    fn rank_kernel(rows: usize, cols: usize, entries: &[Self], tol: &Tolerance) -> usize;

    /// The divisor that puts a nonzero projective vector in canonical form, or
    /// `None` for the zero vector. Exact: first nonzero entry. Float: signed
    /// Euclidean norm, with the sign of the first non-negligible entry.
    fn projective_divisor(coords: &[Self], tol: &Tolerance) -> Option<Self>;

    /// Absolute value of a nonnegative real square root, only where it is representable.
    fn sqrt_checked(&self) -> Option<Self>;
}

macro_rules! float_scalar {
    ($t:ty, $rel:expr, $abs:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn default_tolerance() -> Tolerance {
                Tolerance::new($rel, $abs)
            }

            fn det_kernel(n: usize, entries: Vec<Self>) -> Self {
                linalg::det_partial_pivot(n, entries)
            }

            fn rank_kernel(rows: usize, cols: usize, entries: &[Self], tol: &Tolerance) -> usize {
                linalg::rank_svd(rows, cols, entries, tol.rel as $t)
            }

            fn projective_divisor(coords: &[Self], tol: &Tolerance) -> Option<Self> {
                let norm = coords.iter().map(|x| x * x).sum::<$t>().sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    return None;
                }
                let first = coords
                    .iter()
                    .find(|x| !tol.is_zero(*x, norm as f64))
                    .copied()
                    .unwrap_or(1.0);
                Some(if first < 0.0 { -norm } else { norm })
            }

            fn sqrt_checked(&self) -> Option<Self> {
                (*self >= 0.0).then(|| Float::sqrt(*self))
            }
        }
    };
}

float_scalar!(f64, 1e-9, 1e-12);
float_scalar!(f32, 1e-5, 1e-6);

/// Exact rational scalar used for all identities that must hold on the nose.
pub type Rational = BigRational;

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn det_kernel(n: usize, entries: Vec<Self>) -> Self {
        linalg::det_bareiss_rational(n, entries)
    }

    fn rank_kernel(rows: usize, cols: usize, entries: &[Self], _tol: &Tolerance) -> usize {
        linalg::rank_elimination(rows, cols, entries.to_vec(), &Tolerance::default())
    }

    fn projective_divisor(coords: &[Self], _tol: &Tolerance) -> Option<Self> {
        coords.iter().find(|x| !x.is_zero()).cloned()
    }

    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let root = |v: &BigInt| {
            let r = v.sqrt();
            (&r * &r == *v).then_some(r)
        };
        Some(BigRational::new(root(self.numer())?, root(self.denom())?))
    }
}

/// Converts an `f64` to the exact rational with the same binary value.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    BigRational::from_float(v)
}

/// Least common multiple of the denominators of a slice of rationals.
pub(crate) fn denominator_lcm(values: &[Rational]) -> BigInt {
    values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
