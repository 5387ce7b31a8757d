//! Determinant and rank kernels, one per scalar regime.

use nalgebra::{DMatrix, RealField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, Zero};

use super::scalar::{denominator_lcm, Scalar, Tolerance};

/// Partial-pivot LU determinant for floats.
pub(crate) fn det_partial_pivot<F: Float>(n: usize, mut a: Vec<F>) -> F {
    let mut det = F::one();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                a[i * n + k]
                    .abs()
                    .partial_cmp(&a[j * n + k].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if a[pivot * n + k] == F::zero() {
            return F::zero();
        }
        if pivot != k {
            for c in 0..n {
                a.swap(k * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = a[k * n + k];
        det = det * p;
        for i in (k + 1)..n {
            let factor = a[i * n + k] / p;
            if factor == F::zero() {
                continue;
            }
            for c in (k + 1)..n {
                let v = a[k * n + c];
                a[i * n + c] = a[i * n + c] - factor * v;
            }
        }
    }
    det
}

/// Bareiss fraction-free elimination over the integers.
pub(crate) fn det_bareiss_integer(n: usize, mut a: Vec<BigInt>) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            match ((k + 1)..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(i) => {
                    for c in 0..n {
                        a.swap(k * n + c, i * n + c);
                    }
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                // exact by Sylvester's identity
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    let det = a[n * n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Rational determinant: clear row denominators, then run integer Bareiss.
pub(crate) fn det_bareiss_rational(n: usize, a: Vec<BigRational>) -> BigRational {
    let mut scale = BigInt::one();
    let mut ints = Vec::with_capacity(n * n);
    for r in 0..n {
        let row = &a[r * n..(r + 1) * n];
        let l = denominator_lcm(row);
        for v in row {
            ints.push(v.numer() * (&l / v.denom()));
        }
        scale *= l;
    }
    BigRational::new(det_bareiss_integer(n, ints), scale)
}

/// Rank from the singular values: values at or below `rel * sigma_max` are zero.
pub(crate) fn rank_svd<F: RealField + Float>(rows: usize, cols: usize, entries: &[F], rel: F) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let m = DMatrix::from_row_slice(rows, cols, entries);
    let sv = m.svd(false, false).singular_values;
    let largest = sv.iter().copied().fold(F::zero(), Float::max);
    if largest == F::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * largest).count()
}

/// Row-echelon rank with exact zero tests for exact scalars.
pub(crate) fn rank_elimination<T: Scalar>(
    rows: usize,
    cols: usize,
    mut a: Vec<T>,
    tol: &Tolerance,
) -> usize {
    let scale = a.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows)
            .filter(|&r| !tol.is_zero(&a[r * cols + c], scale))
            .max_by(|&i, &j| {
                a[i * cols + c]
                    .abs()
                    .partial_cmp(&a[j * cols + c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(p) = pivot else { continue };
        for k in 0..cols {
            a.swap(rank * cols + k, p * cols + k);
        }
        let pv = a[rank * cols + c].clone();
        for r in (rank + 1)..rows {
            let f = a[r * cols + c].clone() / pv.clone();
            if f.is_zero() {
                continue;
            }
            for k in c..cols {
                let v = a[rank * cols + k].clone() * f.clone();
                a[r * cols + k] = a[r * cols + k].clone() - v;
            }
        }
        rank += 1;
    }
    rank
}

/// Eigenvalues of a symmetric matrix, ascending, computed in double precision.
pub fn symmetric_spectrum<T: Scalar>(m: &super::Matrix<T>) -> Vec<f64> {
    let n = m.rows();
    if n == 0 {
        return Vec::new();
    }
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)].to_f64());
    let mut ev: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_bareiss_small_cases() {
        let a: Vec<BigInt> = [2, 0, 1, 1, 3, 2, 1, 1, 1].iter().map(|&v| BigInt::from(v)).collect();
        // 2*(3-2) - 0 + 1*(1-3) = 0
        assert_eq!(det_bareiss_integer(3, a), BigInt::zero());
        let b: Vec<BigInt> = [0, 1, 1, 0].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(det_bareiss_integer(2, b), BigInt::from(-1));
    }

    #[test]
    fn float_lu_needs_pivot() {
        let d = det_partial_pivot(2, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(d, -1.0);
    }

    #[test]
    fn svd_rank_tolerance() {
        assert_eq!(rank_svd(2, 2, &[1.0, 2.0, 2.0, 4.0 + 1e-13], 1e-9), 1);
        assert_eq!(rank_svd(2, 2, &[1.0, 2.0, 2.0, 4.1], 1e-9), 2);
    }
}
