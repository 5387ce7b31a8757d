//! Orthogonal projection matrices: the affine model of the Grassmannian.

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Scalar, Tolerance};
use crate::plucker::{cocircuit_matrix, Basis, PluckerVector};

/// A symmetric idempotent `n x n` matrix. Construction validates symmetry,
/// `P^2 = P`, an integral trace equal to the rank, and a diagonal in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMatrix<T> {
    matrix: Matrix<T>,
    rank: usize,
}

impl<T: Scalar> ProjectionMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, &T::default_tolerance())
    }

    pub fn with_tolerance(matrix: Matrix<T>, tol: &Tolerance) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "projection must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_symmetric(tol) {
            return Err(Error::NotProjection("matrix is not symmetric".into()));
        }
        let n = matrix.rows();
        let defect = idempotency_defect(&matrix)?;
        let idempotent = if T::EXACT {
            defect.is_zero()
        } else {
            tol.admits(defect.to_f64().sqrt(), 1.0)
        };
        if !idempotent {
            return Err(Error::NotProjection(format!(
                "P^2 != P (Frobenius residual {:e})",
                defect.to_f64().sqrt()
            )));
        }
        let trace = matrix.trace();
        let d = trace.to_f64().round();
        if d < 0.0 || d > n as f64 || !tol.eq(&trace, &T::from_i64(d as i64)) {
            return Err(Error::NotProjection(format!("trace {trace} is not an integer in [0, n]")));
        }
        let d = d as usize;
        let one = T::one();
        for v in matrix.diagonal() {
            let low = v < T::zero() && !tol.is_zero(&v, 1.0);
            let high = v > one && !tol.is_zero(&(v.clone() - one.clone()), 1.0);
            if low || high {
                return Err(Error::NotProjection(format!("diagonal entry {v} outside [0, 1]")));
            }
        }
        let rank = matrix.rank_with(tol);
        if rank != d {
            return Err(Error::NotProjection(format!("rank {rank} differs from trace {d}")));
        }
        Ok(Self { matrix, rank: d })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    /// `d = rank(P) = trace(P)`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.matrix[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<T> {
        self.matrix.diagonal()
    }

    /// Explicit move to the float regime.
    pub fn to_f64(&self) -> ProjectionMatrix<f64> {
        ProjectionMatrix { matrix: self.matrix.to_f64(), rank: self.rank }
    }
}

/// `P = A^T (A A^T)^{-1} A`.
pub fn projection_from_basis<T: Scalar>(a: &Basis<T>) -> Result<ProjectionMatrix<T>> {
    let a = a.matrix();
    let at = a.transpose();
    let gram_inv = a.matmul(&at)?.inverse()?;
    let p = at.matmul(&gram_inv)?.matmul(a)?;
    ProjectionMatrix::new(p)
}

/// `p_ij = sum_K x_iK x_jK / sum_I x_I^2`, via the cocircuit matrix.
pub fn projection_from_plucker<T: Scalar>(x: &PluckerVector<T>) -> Result<ProjectionMatrix<T>> {
    let total = x.sum_of_squares();
    if total.is_zero() {
        return Err(Error::ZeroVector);
    }
    let c = cocircuit_matrix(x)?;
    let numer = c.matmul(&c.transpose())?;
    let inv = T::one() / total;
    ProjectionMatrix::new(numer.scale(&inv))
}

/// `d` linearly independent rows of `P`, picked by scanning top to bottom and
/// keeping each row that raises the rank.
pub fn basis_from_projection<T: Scalar>(p: &ProjectionMatrix<T>) -> Result<Basis<T>> {
    let d = p.rank();
    if d == 0 {
        return Err(Error::EmptyBasis);
    }
    let n = p.n();
    let mut picked: Option<Matrix<T>> = None;
    for i in 0..n {
        let row = Matrix::new(1, n, p.matrix().row(i).to_vec())?;
        let candidate = match &picked {
            None => row,
            Some(m) => m.stack(&row)?,
        };
        if candidate.rank() == candidate.rows() {
            let full = candidate.rows() == d;
            picked = Some(candidate);
            if full {
                break;
            }
        }
    }
    Basis::new(picked.ok_or(Error::EmptyBasis)?)
}

/// Exact squared Frobenius norm of `M^2 - M`.
pub fn idempotency_defect<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(m.matmul(m)?.sub(m)?.frobenius_sq())
}

/// Frobenius norm of `M^2 - M`, reported in double precision since the
/// square root of a rational is generally irrational.
pub fn idempotency_residual<T: Scalar>(m: &Matrix<T>) -> Result<f64> {
    Ok(idempotency_defect(m)?.to_f64().sqrt())
}

/// `Id - P`, the projection onto the orthogonal complement.
pub fn complement<T: Scalar>(p: &ProjectionMatrix<T>) -> ProjectionMatrix<T> {
    let id = Matrix::identity(p.n());
    let matrix = id.sub(p.matrix()).expect("same shape");
    ProjectionMatrix { matrix, rank: p.n() - p.rank() }
}

/// Largest `n` covered by [`pgr_degree`].
pub const PGR_DEGREE_MAX_N: usize = 10;

// rows n = 3..=10, entries d = 0..=n
const PGR_DEGREES: [&[u64]; 8] = [
    &[1, 4, 4, 1],
    &[1, 8, 12, 8, 1],
    &[1, 16, 40, 40, 16, 1],
    &[1, 32, 140, 184, 140, 32, 1],
    &[1, 64, 504, 992, 992, 504, 64, 1],
    &[1, 128, 1848, 5824, 7056, 5824, 1848, 128, 1],
    &[1, 256, 6864, 36096, 60864, 60864, 36096, 6864, 256, 1],
    &[1, 512, 25740, 232320, 587664, 672288, 587664, 232320, 25740, 512, 1],
];

/// Degree of the projection Grassmannian `pGr(d, n)` as an affine variety.
///
/// Stored reference values for `3 <= n <= 10`; below that the closed forms for
/// `d = 0`, `d = 1` and their duals `d = n`, `d = n - 1` cover every case.
pub fn pgr_degree(d: usize, n: usize) -> Result<u64> {
    if n > PGR_DEGREE_MAX_N || d > n {
        return Err(Error::OutOfTable { d, n, max_n: PGR_DEGREE_MAX_N });
    }
    if n >= 3 {
        return Ok(PGR_DEGREES[n - 3][d]);
    }
    let low = d.min(n - d);
    Ok(if low == 0 { 1 } else { 1 << (n - 1) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rational;
    use crate::plucker::plucker_from_basis;

    type Q = Matrix<Rational>;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn basis(rows: &[&[i64]]) -> Basis<Rational> {
        Basis::new(Q::from_i64_rows(rows).unwrap()).unwrap()
    }

    fn half_pattern() -> Q {
        let h = r(1, 2);
        let z = r(0, 1);
        Q::from_rows(vec![
            vec![h.clone(), z.clone(), h.clone(), z.clone()],
            vec![z.clone(), h.clone(), z.clone(), h.clone()],
            vec![h.clone(), z.clone(), h.clone(), z.clone()],
            vec![z.clone(), h.clone(), z.clone(), h.clone()],
        ])
        .unwrap()
    }

    fn diag(v: &[i64]) -> Q {
        Q::from_fn(v.len(), v.len(), |i, j| if i == j { r(v[i], 1) } else { r(0, 1) })
    }

    #[test]
    fn from_basis_examples() {
        let p = projection_from_basis(&basis(&[&[1, 0, 0, 0], &[0, 1, 0, 0]])).unwrap();
        assert_eq!(p.matrix(), &diag(&[1, 1, 0, 0]));
        let p = projection_from_basis(&basis(&[&[1, 0, 1, 0], &[0, 1, 0, 1]])).unwrap();
        assert_eq!(p.matrix(), &half_pattern());
        let p = projection_from_basis(&basis(&[&[1, 1, 1]])).unwrap();
        assert!(p.matrix().as_slice().iter().all(|v| v == &r(1, 3)));
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn from_plucker_examples() {
        let x = PluckerVector::new(2, 4, [1, 0, 0, 0, 0, 0].iter().map(|&v| r(v, 1)).collect()).unwrap();
        assert_eq!(projection_from_plucker(&x).unwrap().matrix(), &diag(&[1, 1, 0, 0]));
        let a = basis(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]);
        let x = plucker_from_basis(&a);
        let p = projection_from_plucker(&x).unwrap();
        assert_eq!(p, projection_from_basis(&a).unwrap());
        let p7 = projection_from_plucker(&x.scale(&r(7, 1)).unwrap()).unwrap();
        assert_eq!(p7, p);
    }

    #[test]
    fn basis_extraction() {
        let p = ProjectionMatrix::new(diag(&[1, 1, 0, 0])).unwrap();
        let b = basis_from_projection(&p).unwrap();
        assert_eq!(b.matrix(), &Q::from_i64_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]).unwrap());

        let p = ProjectionMatrix::new(half_pattern()).unwrap();
        let b = basis_from_projection(&p).unwrap();
        let h = r(1, 2);
        let z = r(0, 1);
        let expect = Q::from_rows(vec![
            vec![h.clone(), z.clone(), h.clone(), z.clone()],
            vec![z.clone(), h.clone(), z.clone(), h.clone()],
        ])
        .unwrap();
        assert_eq!(b.matrix(), &expect);
        let x = plucker_from_basis(&basis(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]));
        assert!(plucker_from_basis(&b).projectively_eq(&x, &Tolerance::default()));

        let zero = ProjectionMatrix::new(Q::zeros(3, 3)).unwrap();
        assert!(matches!(basis_from_projection(&zero), Err(Error::EmptyBasis)));
    }

    #[test]
    fn rejects_non_projections() {
        let m = Q::from_fn(2, 2, |i, j| if i == j { r(1, 2) } else { r(0, 1) });
        assert!(matches!(ProjectionMatrix::new(m), Err(Error::NotProjection(_))));
        let skew = Q::from_i64_rows(&[&[1, 1], &[0, 0]]).unwrap();
        assert!(matches!(ProjectionMatrix::new(skew), Err(Error::NotProjection(_))));
    }

    #[test]
    fn idempotency_residual_examples() {
        let p = ProjectionMatrix::new(half_pattern()).unwrap();
        assert_eq!(idempotency_residual(p.matrix()).unwrap(), 0.0);
        let m = Q::from_fn(2, 2, |i, j| if i == j { r(1, 2) } else { r(0, 1) });
        assert_eq!(idempotency_defect(&m).unwrap(), r(1, 8));
        let expect = 0.25 * 2f64.sqrt();
        assert!((idempotency_residual(&m).unwrap() - expect).abs() < 1e-15);
        assert_eq!(idempotency_residual(&Q::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn complement_examples() {
        let p = ProjectionMatrix::new(diag(&[1, 1, 0, 0])).unwrap();
        assert_eq!(complement(&p).matrix(), &diag(&[0, 0, 1, 1]));
        let p = ProjectionMatrix::new(half_pattern()).unwrap();
        let c = complement(&p);
        let expect = Q::from_fn(4, 4, |i, j| {
            if i == j {
                r(1, 2)
            } else if (i + 2) % 4 == j {
                r(-1, 2)
            } else {
                r(0, 1)
            }
        });
        assert_eq!(c.matrix(), &expect);
        assert_eq!(c.matrix().trace(), r(2, 1));
        assert_eq!(complement(&c), p);
        // complement output is itself a valid projection
        assert!(ProjectionMatrix::new(c.into_matrix()).is_ok());
    }

    #[test]
    fn degree_table() {
        assert_eq!(pgr_degree(2, 5).unwrap(), 40);
        assert_eq!(pgr_degree(1, 6).unwrap(), 32);
        assert_eq!(pgr_degree(0, 9).unwrap(), 1);
        assert_eq!(pgr_degree(3, 6).unwrap(), 184);
        assert!(matches!(pgr_degree(2, 11), Err(Error::OutOfTable { .. })));
        for n in 0..=PGR_DEGREE_MAX_N {
            for d in 0..=n {
                assert_eq!(pgr_degree(d, n).unwrap(), pgr_degree(n - d, n).unwrap());
            }
            if n >= 1 {
                assert_eq!(pgr_degree(1, n).unwrap(), 1 << (n - 1));
            }
            assert_eq!(pgr_degree(0, n).unwrap(), 1);
        }
    }
}
