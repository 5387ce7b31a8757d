//! Cut spaces of oriented graphs and the combinatorial projector onto them.
//!
//! Edge `i` of the graph is coordinate `i` of `R^n`. The cut space is the row
//! space of the signed vertex-edge incidence matrix; its projector has a
//! purely combinatorial description as a signed count of spanning forests,
//! and its diagonal entries are the effective resistances of the edges.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Rational, Scalar};
use crate::plucker::Basis;
use crate::projector::ProjectionMatrix;

/// Largest edge count for which spanning forests are enumerated by brute force.
pub const BRUTE_FORCE_MAX_EDGES: usize = 20;

/// Vertices are `0..vertex_count`; edge `i` points from `edges[i].0` to `edges[i].1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl OrientedGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (i, &(t, h)) in edges.iter().enumerate() {
            if t >= vertex_count || h >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {} has an endpoint outside 1..={vertex_count}",
                    i + 1
                )));
            }
            if t == h {
                return Err(Error::InvalidGraph(format!("edge {} is a self-loop", i + 1)));
            }
        }
        Ok(Self { vertex_count, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Component label of every vertex, labels assigned in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertex_count);
        for &(t, h) in &self.edges {
            uf.union(t, h);
        }
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        let mut out = vec![0; self.vertex_count];
        for v in 0..self.vertex_count {
            let root = uf.find(v);
            if label[root] == usize::MAX {
                label[root] = next;
                next += 1;
            }
            out[v] = label[root];
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |m| m + 1)
    }

    /// Dimension of the cut space: vertices minus components.
    pub fn cut_rank(&self) -> usize {
        self.vertex_count - self.component_count()
    }

    pub fn is_acyclic(&self, edge_set: &[usize]) -> bool {
        let mut uf = UnionFind::new(self.vertex_count);
        edge_set.iter().all(|&e| {
            let (t, h) = self.edges[e];
            uf.union(t, h)
        })
    }
}

/// One `tail head` pair per line, 1-based; blank lines and `#` comments are
/// skipped. The vertex count is the largest label seen.
impl FromStr for OrientedGraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [t, h] = parts.as_slice() else {
                return Err(Error::Parse(format!("line {}: expected `tail head`", lineno + 1)));
            };
            let parse = |s: &str| -> Result<usize> {
                let v: usize = s
                    .parse()
                    .map_err(|e| Error::Parse(format!("line {}: {s:?}: {e}", lineno + 1)))?;
                v.checked_sub(1)
                    .ok_or_else(|| Error::Parse(format!("line {}: vertices are 1-based", lineno + 1)))
            };
            edges.push((parse(t)?, parse(h)?));
        }
        let vertex_count = edges.iter().map(|&(t, h)| t.max(h) + 1).max().unwrap_or(0);
        Self::new(vertex_count, edges)
    }
}

impl fmt::Display for OrientedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(t, h) in &self.edges {
            writeln!(f, "{} {}", t + 1, h + 1)?;
        }
        Ok(())
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// False when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Signed vertex-cut vectors (`+1` on edges leaving the vertex, `-1` on edges
/// entering it), one per vertex except the last vertex of each component.
pub fn cut_space_basis<T: Scalar>(g: &OrientedGraph) -> Result<Basis<T>> {
    if g.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let comp = g.components();
    let mut last_of = vec![usize::MAX; g.component_count()];
    for (v, &c) in comp.iter().enumerate() {
        last_of[c] = v;
    }
    let rows: Vec<Vec<T>> = (0..g.vertex_count)
        .filter(|&v| last_of[comp[v]] != v)
        .map(|v| {
            g.edges
                .iter()
                .map(|&(t, h)| {
                    if t == v {
                        T::one()
                    } else if h == v {
                        -T::one()
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect();
    Basis::new(Matrix::from_rows(rows)?)
}

/// Every spanning forest (maximal acyclic edge set) as a sorted list of edge indices.
pub fn spanning_forests(g: &OrientedGraph) -> Vec<Vec<usize>> {
    let d = g.cut_rank();
    (0..g.edge_count())
        .combinations(d)
        .filter(|set| g.is_acyclic(set))
        .collect()
}

pub fn spanning_forest_count_brute(g: &OrientedGraph) -> BigInt {
    BigInt::from(spanning_forests(g).len())
}

/// Product over components of the reduced-Laplacian determinant.
pub fn spanning_forest_count_matrix_tree(g: &OrientedGraph) -> BigInt {
    let comp = g.components();
    let mut total = BigInt::from(1);
    for c in 0..g.component_count() {
        let verts: Vec<usize> = (0..g.vertex_count).filter(|&v| comp[v] == c).collect();
        if verts.len() < 2 {
            continue;
        }
        // drop the last vertex of the component
        let kept = &verts[..verts.len() - 1];
        let pos = |v: usize| kept.iter().position(|&k| k == v);
        let m = kept.len();
        let mut lap = Matrix::<Rational>::zeros(m, m);
        for &(t, h) in &g.edges {
            if comp[t] != c {
                continue;
            }
            let (pt, ph) = (pos(t), pos(h));
            let one = Rational::from_i64(1);
            if let Some(a) = pt {
                lap[(a, a)] = lap[(a, a)].clone() + one.clone();
            }
            if let Some(b) = ph {
                lap[(b, b)] = lap[(b, b)].clone() + one.clone();
            }
            if let (Some(a), Some(b)) = (pt, ph) {
                lap[(a, b)] = lap[(a, b)].clone() - one.clone();
                lap[(b, a)] = lap[(b, a)].clone() - one;
            }
        }
        let det = lap.det().expect("square");
        total *= det.to_integer();
    }
    total
}

/// Number of spanning forests from the matrix-tree theorem, cross-checked by
/// enumeration when the graph has at most [`BRUTE_FORCE_MAX_EDGES`] edges.
pub fn spanning_forest_count(g: &OrientedGraph) -> Result<BigInt> {
    let det = spanning_forest_count_matrix_tree(g);
    if g.edge_count() <= BRUTE_FORCE_MAX_EDGES {
        let brute = spanning_forest_count_brute(g);
        if brute != det {
            return Err(Error::Domain(format!(
                "forest counts disagree: enumeration {brute}, matrix-tree {det}"
            )));
        }
    }
    Ok(det)
}

/// Edges on the forest path from `from` to `to`, each with `true` when the
/// path crosses it from tail to head.
fn forest_path(g: &OrientedGraph, forest: &[usize], from: usize, to: usize) -> Vec<(usize, bool)> {
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); g.vertex_count];
    for &e in forest {
        let (t, h) = g.edges[e];
        adj[t].push((h, e, true));
        adj[h].push((t, e, false));
    }
    let mut prev: Vec<Option<(usize, usize, bool)>> = vec![None; g.vertex_count];
    let mut seen = vec![false; g.vertex_count];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &(w, e, forward) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, e, forward));
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = to;
    while v != from {
        let (u, e, forward) = prev[v].expect("endpoints lie in one tree of the forest");
        path.push((e, forward));
        v = u;
    }
    path.reverse();
    path
}

/// The projector onto the cut space, computed from spanning forests alone:
/// `p_ij = sum_K s_K(i, j) / #forests` over edge sets `K` with `K + i` and
/// `K + j` both spanning forests. The sign `s_K(i, j)` is `-1` when the unique
/// cycle of `K + i + j` traverses `i` and `j` in the same direction relative to
/// their orientations and `+1` otherwise.
pub fn kirchhoff_projection(g: &OrientedGraph) -> Result<ProjectionMatrix<Rational>> {
    if g.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = g.edge_count();
    let forests = spanning_forests(g);
    let mut numer = vec![vec![0i64; n]; n];
    for forest in &forests {
        for &i in forest {
            numer[i][i] += 1;
        }
        for j in (0..n).filter(|j| forest.binary_search(j).is_err()) {
            // the cycle of forest + j: j from tail to head, then back through the forest
            let (t, h) = g.edges[j];
            for (i, forward) in forest_path(g, forest, h, t) {
                numer[i][j] += if forward { -1 } else { 1 };
            }
        }
    }
    let total = Rational::from_i64(forests.len() as i64);
    let m = Matrix::from_fn(n, n, |i, j| Rational::from_i64(numer[i][j]) / total.clone());
    ProjectionMatrix::new(m)
}

/// Effective resistance of every edge: the diagonal of the cut-space projector.
pub fn effective_resistances(g: &OrientedGraph) -> Result<Vec<Rational>> {
    Ok(kirchhoff_projection(g)?.diagonal())
}

impl OrientedGraph {
    /// Whether removing edge `e` disconnects its endpoints.
    pub fn is_bridge(&self, e: usize) -> bool {
        let others: Vec<(usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e)
            .map(|(_, &edge)| edge)
            .collect();
        let mut uf = UnionFind::new(self.vertex_count);
        for (t, h) in others {
            uf.union(t, h);
        }
        let (t, h) = self.edges[e];
        uf.find(t) != uf.find(h)
    }
}
