//! The squared Grassmannian: coordinate-wise squares of Plücker vectors.

use num_bigint::BigUint;
use num_traits::{One, Pow};

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Scalar};
use crate::plucker::PluckerVector;
use crate::subset::{subsets, SubsetIndex, SubsetMap};

/// Nonnegative coordinates `q_I`, scaled to sum to one. In this form `q` is
/// the pmf of the projection DPP of the same subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct SquaredPlucker<T> {
    q: SubsetMap<T>,
}

impl<T: Scalar> SquaredPlucker<T> {
    /// Validates nonnegativity and rescales to unit sum.
    pub fn new(q: SubsetMap<T>) -> Result<Self> {
        if let Some((s, v)) = q.iter().find(|(_, v)| v.is_negative()) {
            return Err(Error::Domain(format!("q_{s} = {v} is negative")));
        }
        let total = q.values().iter().fold(T::zero(), |a, v| a + v.clone());
        if total.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(Self { q: q.map(|v| v.clone() / total.clone()) })
    }

    pub fn d(&self) -> usize {
        self.q.d()
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn coords(&self) -> &SubsetMap<T> {
        &self.q
    }

    pub fn values(&self) -> &[T] {
        self.q.values()
    }

    pub fn get(&self, s: &SubsetIndex) -> Option<&T> {
        self.q.get(s)
    }
}

/// `q_I = x_I^2 / sum_J x_J^2`.
pub fn square_plucker<T: Scalar>(x: &PluckerVector<T>) -> Result<SquaredPlucker<T>> {
    SquaredPlucker::new(x.coords().map(|v| v.clone() * v.clone()))
}

/// The symmetric zero-diagonal matrix with off-diagonal entries `q_ij` (d = 2).
pub fn pair_matrix<T: Scalar>(q: &SquaredPlucker<T>) -> Result<Matrix<T>> {
    if q.d() != 2 {
        return Err(Error::WrongDimension { expected: "d = 2", d: q.d(), n: q.n() });
    }
    let n = q.n();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            T::zero()
        } else {
            let s = SubsetIndex::new(vec![i.min(j), i.max(j)], n).expect("in range");
            q.get(&s).expect("pair present").clone()
        }
    }))
}

/// Largest absolute `4 x 4` minor of [`pair_matrix`]; vanishes exactly on
/// `sGr(2, n)`.
pub fn sgr2_residual<T: Scalar>(q: &SquaredPlucker<T>) -> Result<T> {
    if q.d() != 2 || q.n() < 4 {
        return Err(Error::WrongDimension { expected: "d = 2, n >= 4", d: q.d(), n: q.n() });
    }
    let m = pair_matrix(q)?;
    let sets: Vec<SubsetIndex> = subsets(q.n(), 4).collect();
    let mut worst = T::zero();
    for (a, rows) in sets.iter().enumerate() {
        // the matrix is symmetric, so minor(R, C) = minor(C, R)
        for cols in &sets[a..] {
            let v = m.minor(rows.elems(), cols.elems())?.abs();
            if v > worst {
                worst = v;
            }
        }
    }
    Ok(worst)
}

/// The quartic cutting out `sGr(2, 4)`:
/// `q12²q34² + q13²q24² + q14²q23² − 2q12q13q24q34 − 2q12q14q23q34 − 2q13q14q23q24`.
pub fn sgr4_quartic<T: Scalar>(q: &SquaredPlucker<T>) -> Result<T> {
    if q.d() != 2 || q.n() != 4 {
        return Err(Error::WrongDimension { expected: "d = 2, n = 4", d: q.d(), n: q.n() });
    }
    let v = q.values();
    // lexicographic: 12, 13, 14, 23, 24, 34
    let (q12, q13, q14, q23, q24, q34) =
        (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
    let sq = |a: &T, b: &T| a.clone() * a.clone() * b.clone() * b.clone();
    let two = T::from_i64(2);
    let prod = |a: &T, b: &T, c: &T, d: &T| two.clone() * a.clone() * b.clone() * c.clone() * d.clone();
    Ok(sq(q12, q34) + sq(q13, q24) + sq(q14, q23)
        - prod(q12, q13, q24, q34)
        - prod(q12, q14, q23, q34)
        - prod(q13, q14, q23, q24))
}

/// Degree of `sGr(d, n)`:
/// `2^{(d-1)(n-d-1)} (d(n-d))! / prod_{j=1..d} j (j+1) ... (j+n-d-1)`.
pub fn sgr_degree(d: usize, n: usize) -> Result<BigUint> {
    if d == 0 || d >= n {
        return Err(Error::WrongDimension { expected: "1 <= d < n", d, n });
    }
    let k = n - d;
    let factorial = |m: usize| (1..=m).fold(BigUint::one(), |acc, i| acc * i);
    let numer = Pow::pow(BigUint::from(2u32), (d - 1) * (k - 1)) * factorial(d * k);
    let denom = (1..=d).fold(BigUint::one(), |acc, j| {
        (j..j + k).fold(acc, |acc, t| acc * t)
    });
    Ok(numer / denom)
}
