//! Projection determinantal point processes.
//!
//! A projection kernel `P` of rank `d` defines a distribution on `d`-subsets
//! with `mu(I) = det(P_I)` and inclusion probabilities `Pr[J ⊆ X] = det(P_J)`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkit::Scalar;
use crate::projector::ProjectionMatrix;
use crate::subset::{binomial, supersets, SubsetIndex, SubsetMap};

/// Largest number of `d`-subsets for which the pmf is enumerated.
pub const PMF_ENUMERATION_CAP: usize = 10_000;

/// A projection kernel together with its lazily enumerated pmf.
#[derive(Debug)]
pub struct DppModel<T> {
    kernel: ProjectionMatrix<T>,
    pmf: OnceLock<SubsetMap<T>>,
}

impl<T: Scalar> DppModel<T> {
    pub fn new(kernel: ProjectionMatrix<T>) -> Self {
        Self { kernel, pmf: OnceLock::new() }
    }

    pub fn kernel(&self) -> &ProjectionMatrix<T> {
        &self.kernel
    }

    pub fn d(&self) -> usize {
        self.kernel.rank()
    }

    pub fn pmf(&self) -> Result<&SubsetMap<T>> {
        if let Some(p) = self.pmf.get() {
            return Ok(p);
        }
        let p = dpp_pmf(&self.kernel)?;
        Ok(self.pmf.get_or_init(|| p))
    }

    pub fn probability(&self, s: &SubsetIndex) -> Result<T> {
        if s.len() != self.d() {
            return Ok(T::zero());
        }
        self.kernel.matrix().principal_minor(s.elems())
    }
}

/// `mu(I) = det(P_I)` for every `d`-subset `I`, lexicographically ordered.
/// For `d = 0` this is the point mass on the empty set.
pub fn dpp_pmf<T: Scalar>(p: &ProjectionMatrix<T>) -> Result<SubsetMap<T>> {
    let (d, n) = (p.rank(), p.n());
    let count = binomial(n, d);
    if count > PMF_ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { count, cap: PMF_ENUMERATION_CAP });
    }
    SubsetMap::try_from_fn(d, n, |s| p.matrix().principal_minor(s.elems()))
}

/// `Pr[J ⊆ X] = det(P_J)`; zero automatically once `|J| > d`.
pub fn correlation<T: Scalar>(p: &ProjectionMatrix<T>, j: &SubsetIndex) -> Result<T> {
    if j.n() != p.n() {
        return Err(Error::Dimension(format!("subset of [{}] for n = {}", j.n(), p.n())));
    }
    p.matrix().principal_minor(j.elems())
}

/// `mu(I)` recovered from correlations by the alternating sum over all
/// supersets `J ⊇ I`: `sum (-1)^{|J \ I|} det(P_J)`.
pub fn moebius_pmf<T: Scalar>(p: &ProjectionMatrix<T>, i: &SubsetIndex) -> Result<T> {
    if i.len() != p.rank() {
        return Err(Error::Dimension(format!(
            "subset of size {} for a rank {} kernel",
            i.len(),
            p.rank()
        )));
    }
    let mut total = T::zero();
    for j in supersets(i) {
        let c = correlation(p, &j)?;
        if (j.len() - i.len()).is_multiple_of(2) {
            total = total + c;
        } else {
            total = total - c;
        }
    }
    Ok(total)
}

/// Inclusion probabilities `Pr[i ∈ X]`, which equal `diag(P)`.
pub fn marginals<T: Scalar>(p: &ProjectionMatrix<T>) -> Vec<T> {
    p.diagonal()
}

/// `(sum_{I ∋ i} mu(I))_i` computed from an enumerated pmf.
pub fn marginals_from_pmf<T: Scalar>(pmf: &SubsetMap<T>) -> Vec<T> {
    let mut out = vec![T::zero(); pmf.n()];
    for (s, v) in pmf.iter() {
        for &e in s.elems() {
            out[e] = out[e].clone() + v.clone();
        }
    }
    out
}

/// Diagonal entries at or above this are treated as certain inclusions.
const FORCED_THRESHOLD: f64 = 1.0 - 1e-12;
/// Diagonal entries at or below this are never drawn.
const EXCLUDED_THRESHOLD: f64 = 1e-12;

/// `count` independent draws from the projection DPP with kernel `p`.
///
/// Each draw picks elements one at a time, element `i` with probability
/// `K_ii / tr(K)` under the current kernel `K`, then conditions on it:
/// `K <- K - K e_i e_i^T K / K_ii`. Certain elements (`p_ii = 1`) are
/// conditioned on first. Deterministic for a given seed.
pub fn dpp_sample(p: &ProjectionMatrix<f64>, seed: u64, count: usize) -> Vec<SubsetIndex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| draw(p, &mut rng)).collect()
}

fn draw<R: Rng>(p: &ProjectionMatrix<f64>, rng: &mut R) -> SubsetIndex {
    let n = p.n();
    let d = p.rank();
    let mut k: Vec<f64> = p.matrix().as_slice().to_vec();
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    let mut available: Vec<bool> = (0..n).map(|i| k[i * n + i] > EXCLUDED_THRESHOLD).collect();

    let forced: Vec<usize> = (0..n).filter(|&i| k[i * n + i] >= FORCED_THRESHOLD).collect();
    for i in forced.into_iter().take(d) {
        condition(&mut k, n, i);
        available[i] = false;
        chosen.push(i);
    }

    while chosen.len() < d {
        let weights: Vec<f64> = (0..n)
            .map(|i| if available[i] { k[i * n + i].max(0.0) } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            break;
        }
        let mut u = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, w) in weights.iter().enumerate() {
            if *w <= 0.0 {
                continue;
            }
            pick = Some(i);
            if u < *w {
                break;
            }
            u -= w;
        }
        let i = pick.expect("positive total weight");
        condition(&mut k, n, i);
        available[i] = false;
        chosen.push(i);
    }
    chosen.sort_unstable();
    SubsetIndex::new(chosen, n).expect("distinct indices in range")
}

fn condition(k: &mut [f64], n: usize, i: usize) {
    let pivot = k[i * n + i];
    if pivot <= 0.0 {
        return;
    }
    let col: Vec<f64> = (0..n).map(|r| k[r * n + i]).collect();
    for r in 0..n {
        for c in 0..n {
            k[r * n + c] -= col[r] * col[c] / pivot;
        }
    }
}

/// Nonnegative counts `u_I` over `d`-subsets, at least one positive.
#[derive(Clone, Debug, PartialEq)]
pub struct CountVector {
    counts: SubsetMap<u64>,
}

impl CountVector {
    pub fn new(counts: SubsetMap<u64>) -> Result<Self> {
        if counts.values().iter().all(|&c| c == 0) {
            return Err(Error::Domain("count vector has no positive entry".into()));
        }
        Ok(Self { counts })
    }

    /// Tallies sampled subsets, all of size `d` in `[n]`.
    pub fn from_samples(d: usize, n: usize, samples: &[SubsetIndex]) -> Result<Self> {
        let mut values = vec![0u64; binomial(n, d)];
        for s in samples {
            if s.len() != d || s.n() != n {
                return Err(Error::Dimension(format!("sample {s} is not a {d}-subset of [{n}]")));
            }
            values[s.lex_rank()] += 1;
        }
        Self::new(SubsetMap::new(d, n, values)?)
    }

    pub fn d(&self) -> usize {
        self.counts.d()
    }

    pub fn n(&self) -> usize {
        self.counts.n()
    }

    pub fn counts(&self) -> &SubsetMap<u64> {
        &self.counts
    }

    pub fn values(&self) -> &[u64] {
        self.counts.values()
    }

    pub fn total(&self) -> u64 {
        self.values().iter().sum()
    }

    /// Empirical frequencies `u_I / N`.
    pub fn frequencies(&self) -> SubsetMap<f64> {
        let total = self.total() as f64;
        self.counts.map(|&c| c as f64 / total)
    }

    pub fn scaled(&self, factor: u64) -> Result<Self> {
        Self::new(self.counts.map(|&c| c * factor))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{Matrix, Rational};

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn half_pattern() -> ProjectionMatrix<Rational> {
        let m = Matrix::from_fn(4, 4, |i, j| if i % 2 == j % 2 { r(1, 2) } else { r(0, 1) });
        ProjectionMatrix::new(m).unwrap()
    }

    fn diag1100() -> ProjectionMatrix<Rational> {
        let m = Matrix::from_fn(4, 4, |i, j| if i == j && i < 2 { r(1, 1) } else { r(0, 1) });
        ProjectionMatrix::new(m).unwrap()
    }

    fn subset(labels: &[usize], n: usize) -> SubsetIndex {
        SubsetIndex::from_one_based(labels, n).unwrap()
    }

    #[test]
    fn pmf_examples() {
        let pmf = dpp_pmf(&diag1100()).unwrap();
        assert_eq!(pmf.values()[0], r(1, 1));
        assert!(pmf.values()[1..].iter().all(|v| v == &r(0, 1)));

        let pmf = dpp_pmf(&half_pattern()).unwrap();
        let q = r(1, 4);
        let z = r(0, 1);
        assert_eq!(pmf.values(), &[q.clone(), z.clone(), q.clone(), q.clone(), z, q]);

        let third = ProjectionMatrix::new(Matrix::from_fn(3, 3, |_, _| r(1, 3))).unwrap();
        assert_eq!(dpp_pmf(&third).unwrap().values(), &[r(1, 3), r(1, 3), r(1, 3)]);
    }

    #[test]
    fn rank_zero_kernel_is_point_mass_on_empty_set() {
        let zero = ProjectionMatrix::new(Matrix::<Rational>::zeros(3, 3)).unwrap();
        let pmf = dpp_pmf(&zero).unwrap();
        assert_eq!(pmf.len(), 1);
        assert_eq!(pmf.values()[0], r(1, 1));
    }

    #[test]
    fn correlation_examples() {
        let p = half_pattern();
        assert_eq!(correlation(&p, &subset(&[], 4)).unwrap(), r(1, 1));
        assert_eq!(correlation(&p, &subset(&[1], 4)).unwrap(), r(1, 2));
        assert_eq!(correlation(&p, &subset(&[1, 3], 4)).unwrap(), r(0, 1));
        assert_eq!(correlation(&p, &subset(&[1, 2, 3], 4)).unwrap(), r(0, 1));
    }

    #[test]
    fn moebius_examples() {
        assert_eq!(moebius_pmf(&diag1100(), &subset(&[1, 2], 4)).unwrap(), r(1, 1));
        let p = half_pattern();
        assert_eq!(moebius_pmf(&p, &subset(&[1, 2], 4)).unwrap(), r(1, 4));
        assert_eq!(moebius_pmf(&p, &subset(&[1, 3], 4)).unwrap(), r(0, 1));
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(marginals(&diag1100()), vec![r(1, 1), r(1, 1), r(0, 1), r(0, 1)]);
        let p = half_pattern();
        let from_pmf = marginals_from_pmf(&dpp_pmf(&p).unwrap());
        assert_eq!(from_pmf, vec![r(1, 2); 4]);
        assert_eq!(from_pmf, marginals(&p));
        let sum = marginals(&p).into_iter().fold(r(0, 1), |a, b| a + b);
        assert_eq!(sum, r(2, 1));
    }

    #[test]
    fn sampling_is_deterministic_and_respects_point_masses() {
        let fixed = diag1100().to_f64();
        let draws = dpp_sample(&fixed, 11, 50);
        assert!(draws.iter().all(|s| s.elems() == [0, 1]));
        let p = half_pattern().to_f64();
        assert_eq!(dpp_sample(&p, 42, 200), dpp_sample(&p, 42, 200));
        assert_ne!(dpp_sample(&p, 42, 200), dpp_sample(&p, 43, 200));
        // {1,3} and {2,4} have probability zero
        assert!(dpp_sample(&p, 7, 2000)
            .iter()
            .all(|s| s.elems() != [0, 2] && s.elems() != [1, 3]));
    }

    #[test]
    fn counts_from_samples() {
        let s = vec![subset(&[1, 2], 4), subset(&[1, 2], 4), subset(&[3, 4], 4)];
        let u = CountVector::from_samples(2, 4, &s).unwrap();
        assert_eq!(u.values(), &[2, 0, 0, 0, 0, 1]);
        assert_eq!(u.total(), 3);
        assert!(CountVector::new(SubsetMap::new(2, 4, vec![0; 6]).unwrap()).is_err());
    }
}
