use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

use super::scalar::{Scalar, Tolerance};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Integer literal convenience, mostly for tests and fixtures.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| T::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| {
                acc + self[(i, k)].clone() * other[(k, j)].clone()
            })
        }))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Explicit move to the double-precision regime.
    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc + v.clone() * v.clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: &Tolerance) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.max_abs();
        (0..self.rows).all(|i| {
            (i + 1..self.cols).all(|j| {
                tol.is_zero(&(self[(i, j)].clone() - self[(j, i)].clone()), scale)
            })
        })
    }

    pub fn approx_eq(&self, other: &Self, tol: &Tolerance) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let scale = self.max_abs().max(other.max_abs());
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| tol.is_zero(&(a.clone() - b.clone()), scale))
    }

    fn check_index_set(set: &[usize], size: usize) -> Result<()> {
        if let Some(&bad) = set.iter().find(|&&i| i >= size) {
            return Err(Error::Index { index: bad, size });
        }
        if set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedIndex(set.to_vec()));
        }
        Ok(())
    }

    /// Submatrix on strictly increasing 0-based row and column sets.
    pub fn submatrix(&self, rowset: &[usize], colset: &[usize]) -> Result<Self> {
        Self::check_index_set(rowset, self.rows)?;
        Self::check_index_set(colset, self.cols)?;
        Ok(Self::from_fn(rowset.len(), colset.len(), |i, j| {
            self[(rowset[i], colset[j])].clone()
        }))
    }

    pub fn select_columns(&self, colset: &[usize]) -> Result<Self> {
        let all: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&all, colset)
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Dimension("column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Self { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(T::det_kernel(self.rows, self.data.clone()))
    }

    /// Determinant of the submatrix on the given row and column sets.
    pub fn minor(&self, rowset: &[usize], colset: &[usize]) -> Result<T> {
        if rowset.len() != colset.len() {
            return Err(Error::Dimension(format!(
                "{} rows vs {} columns",
                rowset.len(),
                colset.len()
            )));
        }
        self.submatrix(rowset, colset)?.det()
    }

    /// Principal minor on a 0-based index set.
    pub fn principal_minor(&self, set: &[usize]) -> Result<T> {
        self.minor(set, set)
    }

    pub fn rank(&self) -> usize {
        self.rank_with(&T::default_tolerance())
    }

    pub fn rank_with(&self, tol: &Tolerance) -> usize {
        T::rank_kernel(self.rows, self.cols, &self.data, tol)
    }

    /// Inverse by Gauss-Jordan elimination with largest-magnitude pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let tol = T::default_tolerance();
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| {
                    a[(i, c)]
                        .abs()
                        .partial_cmp(&a[(j, c)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&p| !tol.is_zero(&a[(p, c)], scale))
                .ok_or(Error::RankDeficient { rank: self.rank(), expected: n })?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let pv = a[(c, c)].clone();
            for j in 0..n {
                a[(c, j)] = a[(c, j)].clone() / pv.clone();
                inv[(c, j)] = inv[(c, j)].clone() / pv.clone();
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for j in 0..n {
                    let va = a[(c, j)].clone() * f.clone();
                    a[(r, j)] = a[(r, j)].clone() - va;
                    let vi = inv[(c, j)].clone() * f.clone();
                    inv[(r, j)] = inv[(r, j)].clone() - vi;
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(a * self.cols + k, b * self.cols + k);
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}
