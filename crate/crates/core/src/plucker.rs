//! Plücker vectors: maximal minors of a spanning basis, up to global scale.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Scalar, Tolerance};
use crate::subset::{subsets, SubsetIndex, SubsetMap};

/// A `d x n` matrix of full row rank `d >= 1`, whose rows span a subspace of `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis<T>(Matrix<T>);

impl<T: Scalar> Basis<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if m.rows() == 0 {
            return Err(Error::EmptyBasis);
        }
        let rank = m.rank();
        if rank < m.rows() {
            return Err(Error::RankDeficient { rank, expected: m.rows() });
        }
        Ok(Self(m))
    }

    pub fn d(&self) -> usize {
        self.0.rows()
    }

    pub fn n(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    /// `[Id_d | Y]` for a `d x (n-d)` block `Y`.
    pub fn from_chart(y: &Matrix<T>) -> Self {
        let d = y.rows();
        let m = Matrix::from_fn(d, d + y.cols(), |i, j| {
            if j < d {
                if i == j { T::one() } else { T::zero() }
            } else {
                y[(i, j - d)].clone()
            }
        });
        Self(m)
    }
}

/// Coordinates `x_I` for every `d`-subset `I` of `[n]`, not all zero.
///
/// Equality in the projective sense is [`PluckerVector::projectively_eq`];
/// the derived `PartialEq` compares stored coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PluckerVector<T> {
    coords: SubsetMap<T>,
}

impl<T: Scalar> PluckerVector<T> {
    pub fn new(d: usize, n: usize, coords: Vec<T>) -> Result<Self> {
        Self::from_map(SubsetMap::new(d, n, coords)?)
    }

    pub fn from_map(coords: SubsetMap<T>) -> Result<Self> {
        if coords.d() == 0 {
            return Err(Error::WrongDimension { expected: "d >= 1", d: 0, n: coords.n() });
        }
        if coords.values().iter().all(num_traits::Zero::is_zero) {
            return Err(Error::ZeroVector);
        }
        Ok(Self { coords })
    }

    pub fn d(&self) -> usize {
        self.coords.d()
    }

    pub fn n(&self) -> usize {
        self.coords.n()
    }

    pub fn coords(&self) -> &SubsetMap<T> {
        &self.coords
    }

    pub fn values(&self) -> &[T] {
        self.coords.values()
    }

    pub fn get(&self, s: &SubsetIndex) -> Option<&T> {
        self.coords.get(s)
    }

    /// `x` at an ordered index sequence: sorted with the permutation sign, zero
    /// if an index repeats.
    pub fn signed(&self, seq: &[usize]) -> T {
        match self.coords.get_signed(seq) {
            Some((1, v)) => v.clone(),
            Some((_, v)) => -v.clone(),
            None => T::zero(),
        }
    }

    pub fn sum_of_squares(&self) -> T {
        self.values().iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone())
    }

    pub fn scale(&self, s: &T) -> Result<Self> {
        Self::from_map(self.coords.map(|x| x.clone() * s.clone()))
    }

    /// Canonical representative: first nonzero coordinate `+1` for exact
    /// scalars; unit Euclidean norm with positive first coordinate for floats.
    pub fn normalized(&self) -> Self {
        let div = T::projective_divisor(self.values(), &T::default_tolerance())
            .expect("Plücker vectors are nonzero by construction");
        Self { coords: self.coords.map(|x| x.clone() / div.clone()) }
    }

    /// Whether the two vectors are proportional by a nonzero scalar.
    pub fn projectively_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        if self.d() != other.d() || self.n() != other.n() {
            return false;
        }
        let a = self.normalized();
        let b = other.normalized();
        let (av, bv) = (a.values(), b.values());
        // float canonical forms agree up to sign only when the leading coordinate is tiny
        let direct = av.iter().zip(bv).all(|(x, y)| tol.eq(x, y));
        direct || (!T::EXACT && av.iter().zip(bv).all(|(x, y)| tol.eq(x, &-y.clone())))
    }

    pub fn to_f64(&self) -> PluckerVector<f64> {
        PluckerVector { coords: self.coords.map(Scalar::to_f64) }
    }
}

/// Maximal minors of a basis, canonically normalized.
pub fn plucker_from_basis<T: Scalar>(a: &Basis<T>) -> PluckerVector<T> {
    raw_minors(a.matrix()).normalized()
}

/// Maximal minors with no rescaling. Fails only when every minor vanishes.
pub fn raw_minors<T: Scalar>(a: &Matrix<T>) -> PluckerVector<T> {
    let d = a.rows();
    let rows: Vec<usize> = (0..d).collect();
    let coords = SubsetMap::from_fn(d, a.cols(), |s| {
        a.minor(&rows, s.elems()).expect("index sets are in range")
    });
    PluckerVector { coords }
}

/// Largest absolute value over all three-term Grassmann-Plücker relations
/// `x_{Sab} x_{Sce} - x_{Sac} x_{Sbe} + x_{Sae} x_{Sbc}`, with `|S| = d-2` and
/// `a < b < c < e` outside `S`, on canonically normalized coordinates.
///
/// The family certifies membership set-theoretically; it is a superset of a
/// minimal generating set.
pub fn plucker_residual<T: Scalar>(x: &PluckerVector<T>) -> T {
    let (d, n) = (x.d(), x.n());
    if d < 2 || d + 2 > n {
        return T::zero();
    }
    let x = x.normalized();
    let mut worst = T::zero();
    for s in subsets(n, d - 2) {
        let rest: Vec<usize> = (0..n).filter(|i| !s.contains(*i)).collect();
        for q in rest.iter().copied().combinations(4) {
            let (a, b, c, e) = (q[0], q[1], q[2], q[3]);
            let at = |i: usize, j: usize| {
                let mut seq = s.elems().to_vec();
                seq.push(i);
                seq.push(j);
                x.signed(&seq)
            };
            let r = at(a, b) * at(c, e) - at(a, c) * at(b, e) + at(a, e) * at(b, c);
            let r = r.abs();
            if r > worst {
                worst = r;
            }
        }
    }
    worst
}

/// Checks the residual against the scalar's default tolerance.
pub fn ensure_on_grassmannian<T: Scalar>(x: &PluckerVector<T>) -> Result<()> {
    let r = plucker_residual(x);
    if T::default_tolerance().is_zero(&r, 1.0) {
        Ok(())
    } else {
        Err(Error::NotOnGrassmannian { residual: r.to_f64() })
    }
}

/// The `n x C(n, d-1)` matrix with entry `(i, K) = x_{iK}`, columns in
/// lexicographic order of the `(d-1)`-subsets `K`.
pub fn cocircuit_matrix<T: Scalar>(x: &PluckerVector<T>) -> Result<Matrix<T>> {
    ensure_on_grassmannian(x)?;
    Ok(cocircuit_unchecked(x))
}

pub(crate) fn cocircuit_unchecked<T: Scalar>(x: &PluckerVector<T>) -> Matrix<T> {
    let (d, n) = (x.d(), x.n());
    let ks: Vec<SubsetIndex> = subsets(n, d - 1).collect();
    Matrix::from_fn(n, ks.len(), |i, k| {
        let mut seq = vec![i];
        seq.extend_from_slice(ks[k].elems());
        x.signed(&seq)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn basis(rows: &[&[i64]]) -> Basis<Rational> {
        Basis::new(Matrix::from_i64_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn minors_of_two_by_four() {
        let x = plucker_from_basis(&basis(&[&[1, 0, 1, 0], &[0, 1, 0, 1]]));
        let expect: Vec<Rational> = [1, 0, 1, -1, 0, 1].iter().map(|&v| q(v)).collect();
        assert_eq!(x.values(), expect.as_slice());
    }

    #[test]
    fn identity_block() {
        let x = plucker_from_basis(&basis(&[&[1, 0, 0, 0, 0], &[0, 1, 0, 0, 0], &[0, 0, 1, 0, 0]]));
        assert_eq!(x.values()[0], q(1));
        assert!(x.values()[1..].iter().all(|v| v == &q(0)));
    }

    #[test]
    fn rank_deficient_basis() {
        let m = Matrix::<Rational>::from_i64_rows(&[&[1, 2], &[2, 4]]).unwrap();
        assert!(matches!(Basis::new(m), Err(Error::RankDeficient { rank: 1, expected: 2 })));
        assert!(matches!(Basis::new(Matrix::<Rational>::zeros(0, 3)), Err(Error::EmptyBasis)));
    }

    #[test]
    fn residual_cases() {
        let x = plucker_from_basis(&basis(&[&[1, 2, 0, -1, 3], &[0, 1, 4, 1, 1]]));
        assert_eq!(plucker_residual(&x), q(0));
        let off = PluckerVector::new(2, 4, [1, 0, 0, 0, 0, 1].iter().map(|&v| q(v)).collect()).unwrap();
        assert_eq!(plucker_residual(&off), q(1));
        let line = PluckerVector::new(1, 3, vec![q(1), q(5), q(-2)]).unwrap();
        assert_eq!(plucker_residual(&line), q(0));
        assert!(matches!(cocircuit_matrix(&off), Err(Error::NotOnGrassmannian { .. })));
    }

    #[test]
    fn cocircuit_sign_rule() {
        let x = plucker_from_basis(&basis(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]));
        let c = cocircuit_matrix(&x).unwrap();
        assert_eq!((c.rows(), c.cols()), (4, 4));
        let col0: Vec<Rational> = (0..4).map(|i| c[(i, 0)].clone()).collect();
        assert_eq!(col0, vec![q(0), q(-1), q(0), q(0)]);
    }

    #[test]
    fn cocircuit_of_a_line_is_the_vector() {
        let x = PluckerVector::new(1, 3, vec![q(2), q(-1), q(3)]).unwrap();
        let c = cocircuit_matrix(&x).unwrap();
        assert_eq!((c.rows(), c.cols()), (3, 1));
        assert_eq!(c.as_slice(), x.values());
    }

    #[test]
    fn cocircuit_is_skew_for_planes() {
        let x = plucker_from_basis(&basis(&[&[1, 2, 0, -1, 3], &[0, 1, 4, 1, 1]]));
        let c = cocircuit_matrix(&x).unwrap();
        // columns indexed by singletons: the 5x5 skew-symmetric matrix with x_ij above the diagonal
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(c[(i, j)], -c[(j, i)].clone());
                if i < j {
                    let s = SubsetIndex::new(vec![i, j], 5).unwrap();
                    assert_eq!(&c[(i, j)], x.get(&s).unwrap());
                }
            }
        }
    }

    #[test]
    fn float_normalization() {
        let x = PluckerVector::new(2, 4, vec![0.0, -3.0, 0.0, 4.0, 0.0, 0.0]).unwrap().normalized();
        assert_eq!(x.values(), &[0.0, 0.6, 0.0, -0.8, 0.0, 0.0]);
        let y = x.scale(&-7.0).unwrap();
        assert!(x.projectively_eq(&y, &Tolerance::default()));
    }
}
