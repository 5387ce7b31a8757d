//! Index bookkeeping over d-subsets of [n].
//!
//! Subsets are stored 0-based and ordered lexicographically; everything that
//! faces a user (display, parsing, JSON keys) is 1-based.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};

/// A strictly increasing set of 0-based indices inside `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    elems: Vec<usize>,
    n: usize,
}

impl SubsetIndex {
    pub fn new(elems: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = elems.iter().find(|&&e| e >= n) {
            return Err(Error::Index { index: bad, size: n });
        }
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedIndex(elems));
        }
        Ok(Self { elems, n })
    }

    /// Builds from 1-based labels, as they appear in files and on the command line.
    pub fn from_one_based(labels: &[usize], n: usize) -> Result<Self> {
        let elems = labels
            .iter()
            .map(|&l| l.checked_sub(1).ok_or(Error::Index { index: 0, size: n }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(elems, n)
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.elems.iter().map(|e| e + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        self.elems.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.elems.iter().all(|&e| other.contains(e))
    }

    /// Position in the lexicographic order of all subsets of the same size.
    pub fn lex_rank(&self) -> usize {
        let d = self.elems.len();
        let mut rank = 0;
        let mut prev = 0;
        for (k, &e) in self.elems.iter().enumerate() {
            for skipped in prev..e {
                rank += binomial(self.n - skipped - 1, d - k - 1);
            }
            prev = e + 1;
        }
        rank
    }

    /// Indicator vector `e_I` in `{0,1}^n`.
    pub fn indicator(&self) -> Vec<u8> {
        let mut v = vec![0; self.n];
        for &e in &self.elems {
            v[e] = 1;
        }
        v
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.one_based().iter().join(","))
    }
}

/// Parses the 1-based comma-joined form, e.g. `"1,3,4"`. The ambient size is
/// not part of the text, so the result carries `n = usize::MAX` until rebound
/// with [`SubsetIndex::with_n`].
impl FromStr for SubsetIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self { elems: Vec::new(), n: usize::MAX });
        }
        let labels = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("subset label {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&labels, usize::MAX)
    }
}

impl SubsetIndex {
    pub fn with_n(self, n: usize) -> Result<Self> {
        Self::new(self.elems, n)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `[0, n)` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = SubsetIndex> {
    (0..n).combinations(k).map(move |elems| SubsetIndex { elems, n })
}

/// All subsets of `[0, n)` containing `base`, in order of increasing mask.
pub fn supersets(base: &SubsetIndex) -> impl Iterator<Item = SubsetIndex> + '_ {
    let free: Vec<usize> = (0..base.n).filter(|i| !base.contains(*i)).collect();
    (0u64..1 << free.len()).map(move |mask| {
        let mut elems = base.elems.clone();
        elems.extend(
            free.iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &e)| e),
        );
        elems.sort_unstable();
        SubsetIndex { elems, n: base.n }
    })
}

/// Sorts an index sequence, returning the sorted set and the sign of the
/// sorting permutation, or `None` when an index repeats.
pub fn sort_with_sign(seq: &[usize]) -> Option<(Vec<usize>, i8)> {
    let mut v = seq.to_vec();
    let mut sign = 1i8;
    // insertion sort counts transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Values indexed by every `d`-subset of `[n]`, stored in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetMap<T> {
    d: usize,
    n: usize,
    values: Vec<T>,
}

impl<T> SubsetMap<T> {
    pub fn new(d: usize, n: usize, values: Vec<T>) -> Result<Self> {
        if d > n {
            return Err(Error::Dimension(format!("d={d} exceeds n={n}")));
        }
        let expected = binomial(n, d);
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "{} values for {expected} subsets",
                values.len()
            )));
        }
        Ok(Self { d, n, values })
    }

    pub fn from_fn(d: usize, n: usize, f: impl FnMut(&SubsetIndex) -> T) -> Self {
        let mut f = f;
        let values = subsets(n, d).map(|s| f(&s)).collect();
        Self { d, n, values }
    }

    pub fn try_from_fn(
        d: usize,
        n: usize,
        mut f: impl FnMut(&SubsetIndex) -> Result<T>,
    ) -> Result<Self> {
        let values = subsets(n, d).map(|s| f(&s)).collect::<Result<Vec<_>>>()?;
        Ok(Self { d, n, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, s: &SubsetIndex) -> Option<&T> {
        (s.len() == self.d && s.n() == self.n).then(|| &self.values[s.lex_rank()])
    }

    /// Value at an ordered (possibly unsorted) 0-based sequence, with the
    /// skew-symmetric sign convention; `None` when an index repeats.
    pub fn get_signed(&self, seq: &[usize]) -> Option<(i8, &T)> {
        let (sorted, sign) = sort_with_sign(seq)?;
        let s = SubsetIndex::new(sorted, self.n).ok()?;
        self.get(&s).map(|v| (sign, v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetIndex, &T)> {
        subsets(self.n, self.d).zip(self.values.iter())
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SubsetMap<U> {
        SubsetMap { d: self.d, n: self.n, values: self.values.iter().map(f).collect() }
    }
}
