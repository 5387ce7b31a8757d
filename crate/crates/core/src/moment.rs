//! The moment map to the hypersimplex, in Plücker and projection form.

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Scalar, Tolerance};
use crate::plucker::PluckerVector;
use crate::projector::{idempotency_residual, ProjectionMatrix};
use crate::subset::SubsetIndex;

/// A point `z` of `R^n` together with the rank `d` it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<T> {
    d: usize,
    z: Vec<T>,
}

impl<T: Scalar> MomentVector<T> {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.z
    }

    pub fn into_coords(self) -> Vec<T> {
        self.z
    }
}

/// `m(X) = sum_I x_I^2 e_I / sum_J x_J^2`.
pub fn moment_map<T: Scalar>(x: &PluckerVector<T>) -> Result<MomentVector<T>> {
    let total = x.sum_of_squares();
    if total.is_zero() {
        return Err(Error::ZeroVector);
    }
    let mut z = vec![T::zero(); x.n()];
    for (s, v) in x.coords().iter() {
        let sq = v.clone() * v.clone();
        for &e in s.elems() {
            z[e] = z[e].clone() + sq.clone();
        }
    }
    let z = z.into_iter().map(|v| v / total.clone()).collect();
    Ok(MomentVector { d: x.d(), z })
}

/// The moment map on projection matrices is reading off the diagonal.
pub fn moment_from_projection<T: Scalar>(p: &ProjectionMatrix<T>) -> MomentVector<T> {
    MomentVector { d: p.rank(), z: p.diagonal() }
}

/// `0 <= z_i <= 1` and `sum z_i = d`.
pub fn hypersimplex_contains<T: Scalar>(z: &[T], d: usize, tol: &Tolerance) -> bool {
    let one = T::one();
    let boxed = z.iter().all(|v| {
        let below = v.is_negative() && !tol.is_zero(v, 1.0);
        let above = *v > one && !tol.is_zero(&(v.clone() - one.clone()), 1.0);
        !below && !above
    });
    let sum = z.iter().fold(T::zero(), |a, v| a + v.clone());
    boxed && tol.eq(&sum, &T::from_i64(d as i64))
}

/// Subsets `I` with `x_I != 0`, i.e. the vertices `e_I` of the matroid polytope.
/// Floats use `|x_I| > rel * max |x|`.
pub fn matroid_polytope_vertices<T: Scalar>(x: &PluckerVector<T>) -> Vec<SubsetIndex> {
    let tol = T::default_tolerance();
    let scale = x.values().iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    x.coords()
        .iter()
        .filter(|(_, v)| !tol.is_zero(*v, scale))
        .map(|(s, _)| s)
        .collect()
}

/// Whether `z` is a convex combination of the indicator vectors of `vertices`.
pub fn in_convex_hull<T: Scalar>(vertices: &[SubsetIndex], z: &[T]) -> bool {
    let n = z.len();
    // rows: one per coordinate, plus sum(lambda) = 1
    let mut a: Vec<Vec<T>> = (0..n)
        .map(|i| {
            vertices
                .iter()
                .map(|v| if v.contains(i) { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    a.push(vec![T::one(); vertices.len()]);
    let mut b = z.to_vec();
    b.push(T::one());
    feasible(a, b, &T::default_tolerance())
}

/// `moment_map(x)` lies in the convex hull of the matroid polytope vertices of `x`.
pub fn in_matroid_polytope<T: Scalar>(x: &PluckerVector<T>, z: &[T]) -> bool {
    in_convex_hull(&matroid_polytope_vertices(x), z)
}

/// Phase-one simplex with Bland's rule: is `{lambda >= 0 : A lambda = b}` nonempty?
fn feasible<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>, tol: &Tolerance) -> bool {
    let m = a.len();
    let k = a.first().map_or(0, Vec::len);
    for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
        if rhs.is_negative() {
            row.iter_mut().for_each(|v| *v = -v.clone());
            *rhs = -rhs.clone();
        }
    }
    let width = k + m + 1;
    let mut tab: Vec<Vec<T>> = (0..m)
        .map(|r| {
            let mut row = a[r].clone();
            row.extend((0..m).map(|c| if c == r { T::one() } else { T::zero() }));
            row.push(b[r].clone());
            row
        })
        .collect();
    // reduced costs for minimizing the sum of artificials; last slot holds -objective
    let mut cost: Vec<T> = (0..width)
        .map(|j| {
            if j < k || j == width - 1 {
                tab.iter().fold(T::zero(), |acc, row| acc - row[j].clone())
            } else {
                T::zero()
            }
        })
        .collect();
    let mut basis: Vec<usize> = (k..k + m).collect();
    let scale = b.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);

    loop {
        let Some(enter) = (0..width - 1).find(|&j| cost[j].is_negative() && !tol.is_zero(&cost[j], scale)) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for r in 0..m {
            let coef = &tab[r][enter];
            if !coef.is_positive() || tol.is_zero(coef, scale) {
                continue;
            }
            let ratio = tab[r][width - 1].clone() / coef.clone();
            leave = match leave {
                None => Some(r),
                Some(best) => {
                    let best_ratio = tab[best][width - 1].clone() / tab[best][enter].clone();
                    if ratio < best_ratio || (ratio == best_ratio && basis[r] < basis[best]) {
                        Some(r)
                    } else {
                        Some(best)
                    }
                }
            };
        }
        let Some(r) = leave else { break };
        let pivot = tab[r][enter].clone();
        for v in tab[r].iter_mut() {
            *v = v.clone() / pivot.clone();
        }
        let pivot_row = tab[r].clone();
        for (other, row) in tab.iter_mut().enumerate() {
            if other == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * p.clone();
            }
        }
        let f = cost[enter].clone();
        for (v, p) in cost.iter_mut().zip(&pivot_row) {
            *v = v.clone() - f.clone() * p.clone();
        }
        basis[r] = enter;
    }
    tol.is_zero(&cost[width - 1], scale)
}

/// Residuals of the moment-map fiber equations `P^2 = P`, `diag(P) = z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberResidual {
    /// Euclidean norm of `diag(P) - z`.
    pub diagonal_gap: f64,
    /// Frobenius norm of `P^2 - P`.
    pub idempotency: f64,
}

pub fn fiber_residual<T: Scalar>(p: &Matrix<T>, z: &[T]) -> Result<FiberResidual> {
    if !p.is_square() || p.rows() != z.len() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix against {} diagonal targets",
            p.rows(),
            p.cols(),
            z.len()
        )));
    }
    let gap = p
        .diagonal()
        .iter()
        .zip(z)
        .map(|(a, b)| {
            let d = (a.clone() - b.clone()).to_f64();
            d * d
        })
        .sum::<f64>()
        .sqrt();
    Ok(FiberResidual { diagonal_gap: gap, idempotency: idempotency_residual(p)? })
}
