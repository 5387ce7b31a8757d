//! Log-likelihood and maximum-likelihood fitting on the chart `[Id_d | Y]`.
//!
//! Two models share the chart. The squared model assigns `x_I^2 / sum x_J^2`
//! and is optimized in the sign-invariant coordinates
//! `alpha = y_11^2`, `beta_j = y_1j^2`, `gamma_i = y_i1^2` and the adjacent
//! `2 x 2` products `kappa_ij`, taken in log scale with the signs of `kappa`
//! fixed per restart. The positive model assigns `x_I / sum x_J` on the
//! region where every minor is positive and is optimized in `log |y_ij|`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dpp::{CountVector, PMF_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::numkit::Matrix;
use crate::plucker::{raw_minors, Basis, PluckerVector};
use crate::subset::{binomial, subsets, SubsetIndex, SubsetMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    /// Projection DPP: `x_I^2 / sum_J x_J^2`.
    Squared,
    /// Positive Grassmannian: `x_I / sum_J x_J`, all minors positive.
    Positive,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Squared => "squared",
            Model::Positive => "positive",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Model::Squared),
            "positive" => Ok(Model::Positive),
            other => Err(Error::Parse(format!("unknown model '{other}'"))),
        }
    }
}

/// A `d x (n-d)` block `Y` with every entry nonzero, standing for `[Id_d | Y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    y: Matrix<f64>,
}

impl ChartPoint {
    /// Fails with `ZeroEntry` (1-based position) on a zero entry.
    pub fn new(y: Matrix<f64>) -> Result<Self> {
        if y.rows() == 0 || y.cols() == 0 {
            return Err(Error::WrongDimension {
                expected: "1 <= d < n",
                d: y.rows(),
                n: y.rows() + y.cols(),
            });
        }
        for i in 0..y.rows() {
            for j in 0..y.cols() {
                let v = y[(i, j)];
                if v == 0.0 {
                    return Err(Error::ZeroEntry { row: i + 1, col: j + 1 });
                }
                if !v.is_finite() {
                    return Err(Error::Domain(format!("chart entry ({}, {}) is {v}", i + 1, j + 1)));
                }
            }
        }
        Ok(Self { y })
    }

    pub fn d(&self) -> usize {
        self.y.rows()
    }

    pub fn n(&self) -> usize {
        self.y.rows() + self.y.cols()
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.y
    }

    pub fn into_matrix(self) -> Matrix<f64> {
        self.y
    }

    /// Maximal minors of `[Id_d | Y]`, unnormalized, so `x_{1..d} = 1`.
    pub fn plucker(&self) -> PluckerVector<f64> {
        raw_minors(Basis::from_chart(&self.y).matrix())
    }

    /// Negates the rows and columns whose bits are set.
    pub fn flip(&self, row_mask: u64, col_mask: u64) -> Self {
        let y = Matrix::from_fn(self.y.rows(), self.y.cols(), |i, j| {
            let s = ((row_mask >> i) ^ (col_mask >> j)) & 1;
            if s == 1 { -self.y[(i, j)] } else { self.y[(i, j)] }
        });
        Self { y }
    }
}

/// The `2^(n-1)` row/column sign flips of `y`. Negating every row and every
/// column is the identity, so the last column is never flipped.
pub fn sign_flip_orbit(y: &ChartPoint) -> Vec<ChartPoint> {
    let d = y.d();
    (0..1u64 << (y.n() - 1)).map(|mask| y.flip(mask & ((1 << d) - 1), mask >> d)).collect()
}

/// Model probabilities at a chart point.
pub fn model_pmf(y: &ChartPoint, model: Model) -> Result<SubsetMap<f64>> {
    pmf_from_minors(&y.plucker(), model)
}

fn pmf_from_minors(x: &PluckerVector<f64>, model: Model) -> Result<SubsetMap<f64>> {
    match model {
        Model::Squared => {
            let s = x.sum_of_squares();
            Ok(x.coords().map(|v| v * v / s))
        }
        Model::Positive => {
            if let Some((s, v)) = x.coords().iter().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::NotInPositiveChart { subset: s.to_string(), value: *v });
            }
            let s: f64 = x.values().iter().sum();
            Ok(x.coords().map(|v| v / s))
        }
    }
}

/// `sum_I u_I log mu(I)`. Returns `f64::NEG_INFINITY` when some observed
/// subset has probability zero.
pub fn loglik(u: &CountVector, pmf: &SubsetMap<f64>) -> Result<f64> {
    if u.d() != pmf.d() || u.n() != pmf.n() {
        return Err(Error::Dimension(format!(
            "counts over ({}, {}) against a pmf over ({}, {})",
            u.d(),
            u.n(),
            pmf.d(),
            pmf.n()
        )));
    }
    let mut total = 0.0;
    for (&c, &p) in u.values().iter().zip(pmf.values()) {
        if c == 0 {
            continue;
        }
        if !(p > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        total += c as f64 * p.ln();
    }
    Ok(total)
}

/// Sign-invariant coordinates of a chart point.
#[derive(Clone, Debug, PartialEq)]
pub struct ReparamPoint {
    d: usize,
    n: usize,
    alpha: f64,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    kappa: Matrix<f64>,
}

impl ReparamPoint {
    /// `beta` has `n-d-1` entries, `gamma` has `d-1`, `kappa` is `(d-1) x (n-d-1)`.
    pub fn new(
        d: usize,
        n: usize,
        alpha: f64,
        beta: Vec<f64>,
        gamma: Vec<f64>,
        kappa: Matrix<f64>,
    ) -> Result<Self> {
        if d == 0 || d >= n {
            return Err(Error::WrongDimension { expected: "1 <= d < n", d, n });
        }
        let m = n - d;
        if beta.len() != m - 1
            || gamma.len() != d - 1
            || kappa.rows() != d - 1
            || kappa.cols() != m - 1
        {
            return Err(Error::Dimension(format!(
                "reparametrization of ({d}, {n}) needs {} beta, {} gamma, {}x{} kappa",
                m - 1,
                d - 1,
                d - 1,
                m - 1
            )));
        }
        let positive = std::iter::once(&alpha).chain(&beta).chain(&gamma);
        if let Some(v) = positive.clone().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("alpha, beta, gamma must be positive, got {v}")));
        }
        if let Some(v) = kappa.as_slice().iter().find(|v| **v == 0.0 || !v.is_finite()) {
            return Err(Error::Domain(format!("kappa must be nonzero and finite, got {v}")));
        }
        Ok(Self { d, n, alpha, beta, gamma, kappa })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn kappa(&self) -> &Matrix<f64> {
        &self.kappa
    }

    /// Number of coordinates, `(n-1) + (d-1)(n-d-1) = d(n-d)`.
    pub fn dim(&self) -> usize {
        self.d * (self.n - self.d)
    }

    /// Log coordinates `(log alpha, log beta, log gamma, log |kappa|)` and the
    /// signs of `kappa`, row-major.
    pub fn to_log(&self) -> (Vec<f64>, Vec<f64>) {
        let mut theta = vec![self.alpha.ln()];
        theta.extend(self.beta.iter().map(|v| v.ln()));
        theta.extend(self.gamma.iter().map(|v| v.ln()));
        theta.extend(self.kappa.as_slice().iter().map(|v| v.abs().ln()));
        let signs = self.kappa.as_slice().iter().map(|v| v.signum()).collect();
        (theta, signs)
    }

    pub fn from_log(d: usize, n: usize, theta: &[f64], kappa_signs: &[f64]) -> Result<Self> {
        if d == 0 || d >= n || theta.len() != d * (n - d) {
            return Err(Error::Dimension(format!(
                "{} log coordinates for ({d}, {n})",
                theta.len()
            )));
        }
        let m = n - d;
        let kappa_at = n - 1;
        if kappa_signs.len() != theta.len() - kappa_at {
            return Err(Error::Dimension(format!("{} kappa signs", kappa_signs.len())));
        }
        let kappa = Matrix::new(
            d - 1,
            m - 1,
            theta[kappa_at..].iter().zip(kappa_signs).map(|(t, s)| s * t.exp()).collect(),
        )?;
        Self::new(
            d,
            n,
            theta[0].exp(),
            theta[1..m].iter().map(|t| t.exp()).collect(),
            theta[m..kappa_at].iter().map(|t| t.exp()).collect(),
            kappa,
        )
    }

    /// Coordinate-wise relative agreement.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs());
        self.d == other.d
            && self.n == other.n
            && close(self.alpha, other.alpha)
            && self.beta.iter().zip(&other.beta).all(|(a, b)| close(*a, *b))
            && self.gamma.iter().zip(&other.gamma).all(|(a, b)| close(*a, *b))
            && self.kappa.as_slice().iter().zip(other.kappa.as_slice()).all(|(a, b)| close(*a, *b))
    }
}

pub fn reparam_forward(y: &ChartPoint) -> ReparamPoint {
    let (d, m) = (y.d(), y.n() - y.d());
    let e = |i: usize, j: usize| y.matrix()[(i, j)];
    let kappa = Matrix::from_fn(d - 1, m - 1, |i, j| {
        e(i, j) * e(i, j + 1) * e(i + 1, j) * e(i + 1, j + 1)
    });
    ReparamPoint {
        d,
        n: y.n(),
        alpha: e(0, 0) * e(0, 0),
        beta: (1..m).map(|j| e(0, j) * e(0, j)).collect(),
        gamma: (1..d).map(|i| e(i, 0) * e(i, 0)).collect(),
        kappa,
    }
}

/// The representative with positive first row and column.
pub fn reparam_invert(r: &ReparamPoint) -> ChartPoint {
    let (theta, signs) = r.to_log();
    let param = Parametrization::squared(r.d, r.n, &signs);
    ChartPoint::new(param.chart(&theta)).expect("exponentials of finite logs are nonzero")
}

/// `Y(theta) = sign * exp(E theta)` entry-wise, for a fixed sign pattern and
/// exponent matrix `E` with one row per entry of `Y` (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Parametrization {
    d: usize,
    n: usize,
    exponents: Vec<Vec<f64>>,
    signs: Vec<f64>,
}

fn parity(e: usize) -> f64 {
    if e.is_multiple_of(2) { 1.0 } else { -1.0 }
}

impl Parametrization {
    /// Log sign-invariant coordinates, ordered as in [`ReparamPoint::to_log`].
    ///
    /// In 1-based indices, `y_ij` for `i, j >= 2` is
    /// `alpha^{(-1)^{i+j+1}/2} beta_j^{(-1)^{i+1}/2} gamma_i^{(-1)^{j+1}/2}`
    /// times `prod_{k<i, l<j} kappa_kl^{(-1)^{i+j+k+l}}`.
    pub fn squared(d: usize, n: usize, kappa_signs: &[f64]) -> Self {
        let m = n - d;
        let dim = d * m;
        let beta_col = |j: usize| j - 1;
        let gamma_col = |i: usize| m + i - 2;
        let kappa_col = |k: usize, l: usize| n - 1 + (k - 1) * (m - 1) + (l - 1);
        let mut exponents = Vec::with_capacity(dim);
        let mut signs = Vec::with_capacity(dim);
        for i in 1..=d {
            for j in 1..=m {
                let mut row = vec![0.0; dim];
                let mut sign = 1.0;
                match (i, j) {
                    (1, 1) => row[0] = 0.5,
                    (1, _) => row[beta_col(j)] = 0.5,
                    (_, 1) => row[gamma_col(i)] = 0.5,
                    _ => {
                        row[0] = parity(i + j + 1) / 2.0;
                        row[beta_col(j)] = parity(i + 1) / 2.0;
                        row[gamma_col(i)] = parity(j + 1) / 2.0;
                        for k in 1..i {
                            for l in 1..j {
                                row[kappa_col(k, l)] = parity(i + j + k + l);
                                sign *= kappa_signs[kappa_col(k, l) - (n - 1)];
                            }
                        }
                    }
                }
                exponents.push(row);
                signs.push(sign);
            }
        }
        Self { d, n, exponents, signs }
    }

    /// `log |y_ij|` directly, with the signs of `y`.
    pub fn entrywise(signs: &Matrix<f64>) -> Self {
        let dim = signs.rows() * signs.cols();
        let exponents = (0..dim)
            .map(|k| (0..dim).map(|c| if c == k { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            d: signs.rows(),
            n: signs.rows() + signs.cols(),
            exponents,
            signs: signs.as_slice().iter().map(|v| v.signum()).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d * (self.n - self.d)
    }

    pub fn chart(&self, theta: &[f64]) -> Matrix<f64> {
        let data = self
            .exponents
            .iter()
            .zip(&self.signs)
            .map(|(row, s)| s * dot(row, theta).exp())
            .collect();
        Matrix::new(self.d, self.n - self.d, data).expect("one exponent row per entry")
    }
}

/// `theta -> L_u(pmf(Y(theta)))` with its analytic gradient.
#[derive(Clone, Debug)]
pub struct Objective<'a> {
    u: &'a CountVector,
    model: Model,
    param: Parametrization,
    total: f64,
    sets: Vec<SubsetIndex>,
}

impl<'a> Objective<'a> {
    pub fn new(u: &'a CountVector, model: Model, param: Parametrization) -> Result<Self> {
        if u.d() != param.d || u.n() != param.n {
            return Err(Error::Dimension(format!(
                "counts over ({}, {}) against a chart for ({}, {})",
                u.d(),
                u.n(),
                param.d,
                param.n
            )));
        }
        Ok(Self {
            u,
            model,
            param,
            total: u.total() as f64,
            sets: subsets(u.n(), u.d()).collect(),
        })
    }

    pub fn parametrization(&self) -> &Parametrization {
        &self.param
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let y = self.param.chart(theta);
        let x = raw_minors(Basis::from_chart(&y).matrix());
        self.value_at(x.values())
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        let counts = self.u.values();
        let mut l = 0.0;
        match self.model {
            Model::Squared => {
                let s: f64 = x.iter().map(|v| v * v).sum();
                if !(s.is_finite() && s > 0.0) {
                    return f64::NEG_INFINITY;
                }
                let ls = s.ln();
                for (&c, &v) in counts.iter().zip(x) {
                    if c > 0 {
                        l += c as f64 * ((v * v).ln() - ls);
                    }
                }
            }
            Model::Positive => {
                if x.iter().any(|v| !(*v > 0.0)) {
                    return f64::NEG_INFINITY;
                }
                let t: f64 = x.iter().sum();
                if !t.is_finite() {
                    return f64::NEG_INFINITY;
                }
                let lt = t.ln();
                for (&c, &v) in counts.iter().zip(x) {
                    if c > 0 {
                        l += c as f64 * (v.ln() - lt);
                    }
                }
            }
        }
        if l.is_nan() { f64::NEG_INFINITY } else { l }
    }

    /// Objective and gradient by the chain rule through the minors: the
    /// derivative of `x_I` in `y_ab` is the cofactor of that entry in the
    /// columns `I` of `[Id_d | Y]`.
    pub fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let d = self.param.d;
        let y = self.param.chart(theta);
        let full = Basis::from_chart(&y).into_matrix();
        let x = raw_minors(&full);
        let x = x.values();
        let value = self.value_at(x);
        let dim = self.param.dim();
        if !value.is_finite() {
            return (value, vec![f64::NAN; dim]);
        }
        let counts = self.u.values();
        let gx: Vec<f64> = match self.model {
            Model::Squared => {
                let s: f64 = x.iter().map(|v| v * v).sum();
                counts
                    .iter()
                    .zip(x)
                    .map(|(&c, &v)| {
                        let own = if c > 0 { 2.0 * c as f64 / v } else { 0.0 };
                        own - 2.0 * self.total * v / s
                    })
                    .collect()
            }
            Model::Positive => {
                let t: f64 = x.iter().sum();
                counts
                    .iter()
                    .zip(x)
                    .map(|(&c, &v)| {
                        let own = if c > 0 { c as f64 / v } else { 0.0 };
                        own - self.total / t
                    })
                    .collect()
            }
        };
        let m = y.cols();
        let mut gy = vec![0.0; d * m];
        for (set, g) in self.sets.iter().zip(&gx) {
            if *g == 0.0 {
                continue;
            }
            let cols = set.elems();
            for (c, &col) in cols.iter().enumerate() {
                if col < d {
                    continue;
                }
                let b = col - d;
                let rest_cols: Vec<usize> =
                    cols.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, v)| *v).collect();
                for a in 0..d {
                    let rest_rows: Vec<usize> = (0..d).filter(|r| *r != a).collect();
                    let minor = full.minor(&rest_rows, &rest_cols).expect("in range");
                    gy[a * m + b] += g * parity(a + c) * minor;
                }
            }
        }
        let ys = y.as_slice();
        let grad = (0..dim)
            .map(|k| {
                self.param
                    .exponents
                    .iter()
                    .enumerate()
                    .map(|(e, row)| row[k] * ys[e] * gy[e])
                    .sum()
            })
            .collect();
        (value, grad)
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        self.value_and_gradient(theta).1
    }

    /// Central differences with step `h`.
    pub fn finite_difference_gradient(&self, theta: &[f64], h: f64) -> Vec<f64> {
        (0..theta.len())
            .map(|k| {
                let mut plus = theta.to_vec();
                let mut minus = theta.to_vec();
                plus[k] += h;
                minus[k] -= h;
                (self.value(&plus) - self.value(&minus)) / (2.0 * h)
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Stationarity threshold on the Euclidean norm of the gradient.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Runs ending with a coordinate beyond this in absolute value are boundary cases.
    pub boundary_limit: f64,
    /// Optima closer than this in max-norm on the pmf are merged.
    pub cluster_radius: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            grad_tol: 1e-8,
            max_iter: 3000,
            boundary_limit: 25.0,
            cluster_radius: 1e-5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AscentStatus {
    Stationary,
    /// Coordinates diverged: the supremum is approached at the boundary.
    Boundary,
    /// Iteration cap or failed line search before stationarity.
    Stalled,
}

/// One run of quasi-Newton ascent.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalAscent {
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: AscentStatus,
    /// Objective at each accepted iterate, starting point first.
    pub history: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-16;
/// Runs are abandoned once coordinates exceed this multiple of the boundary limit.
const HARD_STOP: f64 = 4.0;

/// BFGS directions with Armijo backtracking (initial step 1, shrink 0.5).
///
/// Once the predicted gain falls below the rounding level of the objective,
/// a step is also accepted if it lowers the gradient norm while the
/// objective stays within that rounding level.
pub fn local_ascent(obj: &Objective<'_>, theta0: Vec<f64>, cfg: &FitConfig) -> LocalAscent {
    let p = theta0.len();
    let mut theta = theta0;
    let (mut f, mut g) = obj.value_and_gradient(&theta);
    let mut history = vec![f];
    let mut h = identity(p);
    let mut scaled = false;
    let mut status = AscentStatus::Stalled;
    let mut iterations = 0;
    if !f.is_finite() {
        return LocalAscent {
            grad_norm: f64::INFINITY,
            theta,
            loglik: f,
            iterations,
            status,
            history,
        };
    }
    while iterations < cfg.max_iter {
        let gn = norm(&g);
        if max_abs(&theta) > HARD_STOP * cfg.boundary_limit {
            break;
        }
        if gn <= cfg.grad_tol {
            status = AscentStatus::Stationary;
            break;
        }
        let mut dir = mat_vec(&h, &g);
        let mut slope = dot(&dir, &g);
        if !(slope > 0.0) {
            h = identity(p);
            dir = g.clone();
            slope = gn * gn;
        }
        let noise = 64.0 * f64::EPSILON * (1.0 + f.abs());
        let mut t = 1.0;
        let accepted = loop {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
            let (fc, gc) = obj.value_and_gradient(&cand);
            if fc.is_finite() {
                let armijo = fc >= f + ARMIJO_C1 * t * slope;
                let quiet = t * slope <= noise && fc >= f - noise && norm(&gc) < gn;
                if armijo || quiet {
                    break Some((cand, fc, gc));
                }
            }
            t *= SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((cand, fc, gc)) = accepted else { break };
        iterations += 1;
        let s: Vec<f64> = cand.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g.iter().zip(&gc).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * norm(&s) * norm(&yv) {
            if !scaled {
                let scale = sy / dot(&yv, &yv);
                h = identity(p).into_iter().map(|r| r.into_iter().map(|v| v * scale).collect()).collect();
                scaled = true;
            }
            bfgs_update(&mut h, &s, &yv, sy);
        }
        theta = cand;
        f = fc;
        g = gc;
        history.push(f);
    }
    if max_abs(&theta) > cfg.boundary_limit {
        status = AscentStatus::Boundary;
    }
    LocalAscent { grad_norm: norm(&g), theta, loglik: f, iterations, status, history }
}

fn identity(p: usize) -> Vec<Vec<f64>> {
    (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mat_vec(h: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    h.iter().map(|row| dot(row, v)).collect()
}

/// Inverse-Hessian update `(I - r s y^T) H (I - r y s^T) + r s s^T`, `r = 1/(s.y)`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let p = s.len();
    let r = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..p {
        for j in 0..p {
            h[i][j] += (1.0 + r * yhy) * r * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// A group of restarts that ended at the same pmf.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimumCluster {
    pub pmf: SubsetMap<f64>,
    pub loglik: f64,
    pub members: usize,
    pub boundary: bool,
}

/// Reported when the best run diverged instead of reaching a critical point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryReport {
    pub max_abs_coordinate: f64,
    pub min_probability: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: Model,
    pub estimate: ReparamPoint,
    pub chart: ChartPoint,
    pub pmf_hat: SubsetMap<f64>,
    pub loglik: f64,
    pub grad_norm: f64,
    pub restarts_used: usize,
    /// Restarts that ended stationary or at the boundary.
    pub converged: usize,
    pub distinct_optima: Vec<OptimumCluster>,
    pub boundary: Option<BoundaryReport>,
}

struct Outcome {
    run: LocalAscent,
    chart: ChartPoint,
    pmf: SubsetMap<f64>,
}

/// Stream `index` of the ChaCha generator seeded with `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Standard normal entries, redrawn while smaller than `1e-3` in magnitude.
pub fn random_chart<R: Rng>(d: usize, n: usize, rng: &mut R) -> ChartPoint {
    let y = Matrix::from_fn(d, n - d, |_, _| loop {
        let v: f64 = rng.sample(StandardNormal);
        if v.abs() >= 1e-3 {
            break v;
        }
    });
    ChartPoint::new(y).expect("entries bounded away from zero")
}

/// A chart point with every minor positive, from a Vandermonde matrix on
/// random increasing nodes brought to the form `[Id_d | Y]`.
pub fn random_positive_chart<R: Rng>(d: usize, n: usize, rng: &mut R) -> ChartPoint {
    loop {
        let mut t = 0.0;
        let nodes: Vec<f64> = (0..n)
            .map(|_| {
                t += 0.2 + rng.random::<f64>();
                t
            })
            .collect();
        let a = Matrix::from_fn(d, n, |i, j| nodes[j].powi(i as i32));
        let left: Vec<usize> = (0..d).collect();
        let right: Vec<usize> = (d..n).collect();
        let rows: Vec<usize> = (0..d).collect();
        let lead = a.submatrix(&rows, &left).and_then(|m| m.inverse());
        let Ok(lead) = lead else { continue };
        let y = lead.matmul(&a.submatrix(&rows, &right).expect("in range")).expect("conformable");
        if let Ok(chart) = ChartPoint::new(y) {
            if chart.plucker().values().iter().all(|v| *v > 0.0) {
                return chart;
            }
        }
    }
}

fn start(d: usize, n: usize, model: Model, seed: u64, index: usize) -> (Parametrization, Vec<f64>) {
    let mut rng = restart_rng(seed, index);
    match model {
        Model::Squared => {
            let (theta, signs) = reparam_forward(&random_chart(d, n, &mut rng)).to_log();
            (Parametrization::squared(d, n, &signs), theta)
        }
        Model::Positive => {
            let chart = random_positive_chart(d, n, &mut rng);
            let theta = chart.matrix().as_slice().iter().map(|v| v.abs().ln()).collect();
            (Parametrization::entrywise(chart.matrix()), theta)
        }
    }
}

fn cmp_pmf(a: &SubsetMap<f64>, b: &SubsetMap<f64>) -> Ordering {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn pmf_distance(a: &SubsetMap<f64>, b: &SubsetMap<f64>) -> f64 {
    a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Multistart maximum likelihood. Restart `k` starts from stream `k` of the
/// seeded generator; runs are independent and merged in a fixed order
/// (log-likelihood descending, then pmf lexicographically).
pub fn mle_fit(u: &CountVector, model: Model, cfg: &FitConfig) -> Result<FitResult> {
    let (d, n) = (u.d(), u.n());
    if d == 0 || d >= n {
        return Err(Error::WrongDimension { expected: "1 <= d < n", d, n });
    }
    let count = binomial(n, d);
    if count > PMF_ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { count, cap: PMF_ENUMERATION_CAP });
    }
    if cfg.restarts == 0 {
        return Err(Error::Domain("at least one restart is required".into()));
    }

    let runs: Vec<Result<Option<Outcome>>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let (param, theta0) = start(d, n, model, cfg.seed, k);
            let obj = Objective::new(u, model, param)?;
            let run = local_ascent(&obj, theta0, cfg);
            let Ok(chart) = ChartPoint::new(obj.parametrization().chart(&run.theta)) else {
                return Ok(None);
            };
            let Ok(pmf) = model_pmf(&chart, model) else { return Ok(None) };
            Ok(Some(Outcome { run, chart, pmf }))
        })
        .collect();

    let mut done = Vec::new();
    let mut best_stalled = f64::INFINITY;
    for r in runs {
        match r? {
            Some(o) if o.run.status != AscentStatus::Stalled => done.push(o),
            Some(o) => best_stalled = best_stalled.min(o.run.grad_norm),
            None => {}
        }
    }
    if done.is_empty() {
        return Err(Error::ConvergenceFailure(format!(
            "{} restarts, smallest final gradient norm {best_stalled:.3e} above {:.1e}",
            cfg.restarts, cfg.grad_tol
        )));
    }
    done.sort_by(|a, b| b.run.loglik.total_cmp(&a.run.loglik).then_with(|| cmp_pmf(&a.pmf, &b.pmf)));

    let mut clusters: Vec<OptimumCluster> = Vec::new();
    for o in &done {
        let boundary = o.run.status == AscentStatus::Boundary;
        match clusters
            .iter_mut()
            .find(|c| c.boundary == boundary && pmf_distance(&c.pmf, &o.pmf) <= cfg.cluster_radius)
        {
            Some(c) => c.members += 1,
            None => clusters.push(OptimumCluster {
                pmf: o.pmf.clone(),
                loglik: o.run.loglik,
                members: 1,
                boundary,
            }),
        }
    }

    let converged = done.len();
    let best = done.swap_remove(0);
    let boundary = (best.run.status == AscentStatus::Boundary).then(|| BoundaryReport {
        max_abs_coordinate: max_abs(&best.run.theta),
        min_probability: best.pmf.values().iter().copied().fold(f64::INFINITY, f64::min),
        iterations: best.run.iterations,
    });
    Ok(FitResult {
        model,
        estimate: reparam_forward(&best.chart),
        chart: best.chart,
        pmf_hat: best.pmf,
        loglik: best.run.loglik,
        grad_norm: best.run.grad_norm,
        restarts_used: cfg.restarts,
        converged,
        distinct_optima: clusters,
        boundary,
    })
}

/// Published ML degree for `(d, n)`, by duality `d <-> n-d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MlDegree {
    Exact(u64),
    /// Only a lower bound is known.
    AtLeast(u64),
}

const ML_DEGREE_D2: [(u64, u64); 6] =
    [(4, 3), (22, 12), (156, 60), (1368, 360), (14400, 2520), (177840, 20160)];

/// Reference constants for the positive and squared models; not recomputed.
pub fn ml_degree_reference(model: Model, d: usize, n: usize) -> Option<MlDegree> {
    let k = d.min(n.checked_sub(d)?);
    let pick = |pos: u64, sq: u64| match model {
        Model::Positive => pos,
        Model::Squared => sq,
    };
    match (k, n) {
        (2, 4..=9) => {
            let (pos, sq) = ML_DEGREE_D2[n - 4];
            Some(MlDegree::Exact(pick(pos, sq)))
        }
        (3, 6) => Some(MlDegree::Exact(pick(1937, 552))),
        (3, 7) => Some(match model {
            Model::Positive => MlDegree::AtLeast(499_976),
            Model::Squared => MlDegree::Exact(73_440),
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(rows: &[&[f64]]) -> ChartPoint {
        ChartPoint::new(Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()).unwrap()
    }

    fn counts(d: usize, n: usize, v: &[u64]) -> CountVector {
        CountVector::new(SubsetMap::new(d, n, v.to_vec()).unwrap()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn squared_pmf_from_minors() {
        let y = chart(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let pmf = model_pmf(&y, Model::Squared).unwrap();
        let expect: Vec<f64> = [1.0, 1.0, 4.0, 1.0, 1.0, 1.0].iter().map(|v| v / 9.0).collect();
        assert!(close(pmf.values(), &expect, 1e-15));
        assert!(matches!(
            model_pmf(&y, Model::Positive),
            Err(Error::NotInPositiveChart { ref subset, .. }) if subset == "2,3"
        ));
    }

    #[test]
    fn line_pmf_is_squared_row() {
        let y = chart(&[&[2.0, -1.0, 3.0]]);
        let pmf = model_pmf(&y, Model::Squared).unwrap();
        assert!(close(pmf.values(), &[1.0 / 15.0, 4.0 / 15.0, 1.0 / 15.0, 9.0 / 15.0], 1e-15));
    }

    #[test]
    fn zero_entries_rejected() {
        let m = Matrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        assert!(matches!(ChartPoint::new(m), Err(Error::ZeroEntry { row: 1, col: 2 })));
    }

    #[test]
    fn loglik_examples() {
        let u = counts(2, 4, &[1, 0, 1, 1, 0, 1]);
        let pmf = SubsetMap::new(2, 4, vec![0.25, 0.0, 0.25, 0.25, 0.0, 0.25]).unwrap();
        assert!((loglik(&u, &pmf).unwrap() - 4.0 * 0.25f64.ln()).abs() < 1e-12);
        let point = SubsetMap::new(2, 4, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(loglik(&u, &point).unwrap(), f64::NEG_INFINITY);
        let tripled = u.scaled(3).unwrap();
        assert!((loglik(&tripled, &pmf).unwrap() - 12.0 * 0.25f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn forward_examples() {
        let r = reparam_forward(&chart(&[&[2.0, 3.0], &[5.0, 7.0]]));
        assert_eq!(r.alpha(), 4.0);
        assert_eq!(r.beta(), &[9.0]);
        assert_eq!(r.gamma(), &[25.0]);
        assert_eq!(r.kappa().as_slice(), &[210.0]);
        let ones = reparam_forward(&chart(&[&[1.0; 3], &[1.0; 3], &[1.0; 3]]));
        assert_eq!(ones.dim(), 9);
        assert!(ones.to_log().0.iter().all(|t| *t == 0.0));
        let back = reparam_invert(&ones);
        assert!(back.matrix().as_slice().iter().all(|v| (*v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn invert_matches_displayed_interior_entry() {
        let y = chart(&[&[1.3, -0.7, 2.1], &[0.4, 1.9, -1.1], &[-0.8, 0.6, 1.5]]);
        let r = reparam_forward(&y);
        let back = reparam_invert(&r);
        let k11 = r.kappa()[(0, 0)];
        let y22 = k11 / (r.alpha() * r.beta()[0] * r.gamma()[0]).sqrt();
        assert!((back.matrix()[(1, 1)] - y22).abs() < 1e-12);
        let flipped = |i, j| back.matrix()[(i, j)].abs() - y.matrix()[(i, j)].abs();
        for i in 0..3 {
            for j in 0..3 {
                assert!(flipped(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orbit_has_full_size_and_constant_pmf() {
        let y = chart(&[&[1.0, 2.0, -3.0], &[0.5, -1.5, 2.5]]);
        let orbit = sign_flip_orbit(&y);
        assert_eq!(orbit.len(), 16);
        let base = model_pmf(&y, Model::Squared).unwrap();
        let mut seen: Vec<Vec<u64>> = Vec::new();
        for z in &orbit {
            assert!(close(model_pmf(z, Model::Squared).unwrap().values(), base.values(), 1e-14));
            assert!(reparam_forward(z).approx_eq(&reparam_forward(&y), 1e-14));
            let key = z.matrix().as_slice().iter().map(|v| v.to_bits()).collect();
            assert!(!seen.contains(&key));
            seen.push(key);
        }
    }

    #[test]
    fn reparam_validation() {
        let k = Matrix::from_rows(vec![vec![1.0]]).unwrap();
        assert!(matches!(
            ReparamPoint::new(2, 4, -1.0, vec![1.0], vec![1.0], k.clone()),
            Err(Error::Domain(_))
        ));
        let zero = Matrix::from_rows(vec![vec![0.0]]).unwrap();
        assert!(ReparamPoint::new(2, 4, 1.0, vec![1.0], vec![1.0], zero).is_err());
        assert!(ReparamPoint::new(2, 4, 1.0, vec![], vec![1.0], k).is_err());
    }

    #[test]
    fn gradient_matches_differences() {
        let u = counts(2, 4, &[5, 3, 7, 2, 4, 6]);
        let mut rng = restart_rng(11, 0);
        for _ in 0..5 {
            let (theta, signs) = reparam_forward(&random_chart(2, 4, &mut rng)).to_log();
            let obj = Objective::new(&u, Model::Squared, Parametrization::squared(2, 4, &signs)).unwrap();
            let g = obj.gradient(&theta);
            let fd = obj.finite_difference_gradient(&theta, 1e-6);
            assert!(norm(&g.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>()) <= 1e-4 * norm(&g).max(1.0));
        }
        let pos = random_positive_chart(2, 4, &mut rng);
        let theta: Vec<f64> = pos.matrix().as_slice().iter().map(|v| v.abs().ln()).collect();
        let obj = Objective::new(&u, Model::Positive, Parametrization::entrywise(pos.matrix())).unwrap();
        let g = obj.gradient(&theta);
        let fd = obj.finite_difference_gradient(&theta, 1e-6);
        assert!(close(&g, &fd, 1e-4 * norm(&g).max(1.0)));
    }

    #[test]
    fn positive_start_is_positive() {
        let mut rng = restart_rng(3, 1);
        for (d, n) in [(1, 3), (2, 4), (2, 5), (3, 6)] {
            let c = random_positive_chart(d, n, &mut rng);
            assert!(model_pmf(&c, Model::Positive).is_ok());
        }
    }

    #[test]
    fn point_mass_data_is_a_boundary_case() {
        let u = counts(2, 4, &[10, 0, 0, 0, 0, 0]);
        let fit = mle_fit(&u, Model::Squared, &FitConfig { restarts: 4, ..Default::default() }).unwrap();
        assert!(fit.boundary.is_some());
        assert!(fit.pmf_hat.values()[0] > 1.0 - 1e-6);
        assert!(fit.loglik < 0.0 && fit.loglik > -1e-4);
    }

    #[test]
    fn fit_is_stationary_and_reproducible() {
        let u = counts(2, 4, &[12, 7, 30, 9, 14, 8]);
        let cfg = FitConfig { restarts: 8, seed: 5, ..Default::default() };
        let a = mle_fit(&u, Model::Squared, &cfg).unwrap();
        let b = mle_fit(&u, Model::Squared, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.boundary.is_none());
        assert!(a.grad_norm <= 1e-8);
        let p = mle_fit(&u, Model::Positive, &cfg).unwrap();
        assert!(p.grad_norm <= 1e-8 || p.boundary.is_some());
    }

    #[test]
    fn reference_degrees() {
        assert_eq!(ml_degree_reference(Model::Squared, 2, 4), Some(MlDegree::Exact(3)));
        assert_eq!(ml_degree_reference(Model::Positive, 3, 5), Some(MlDegree::Exact(22)));
        assert_eq!(ml_degree_reference(Model::Squared, 3, 6), Some(MlDegree::Exact(552)));
        assert_eq!(ml_degree_reference(Model::Positive, 3, 7), Some(MlDegree::AtLeast(499_976)));
        assert_eq!(ml_degree_reference(Model::Squared, 2, 10), None);
        assert_eq!(ml_degree_reference(Model::Squared, 3, 8), None);
    }
}
