//! Simple undirected graphs, weighted complete graphs and disjoint vertex-set tuples.
//!
//! Adjacency is stored as one bitset row per vertex, which keeps the hot loops in
//! [`crate::pattern`] down to word-wise `and` + `popcount`.

use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) const WORD: usize = 64;

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Graph {
            n,
            words,
            adj: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::from_fn(n, |_, _| true)
    }

    /// Builds a graph by asking `f(u, v)` once for every pair `u < v`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Self::empty(n);
        for v in 1..n {
            for u in 0..v {
                if f(u, v) {
                    g.set_edge(u, v);
                }
            }
        }
        g
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if g.has_edge(u, v) {
                return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
            }
            g.set_edge(u, v);
        }
        Ok(g)
    }

    pub fn path(n: usize) -> Self {
        Self::from_fn(n, |u, v| v == u + 1)
    }

    pub fn cycle(n: usize) -> Self {
        Self::from_fn(n, |u, v| v == u + 1 || (n > 2 && u == 0 && v == n - 1))
    }

    /// `K_{a,b}` with sides `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        Self::from_fn(a + b, |u, v| (u < a) != (v < a))
    }

    /// The star `K_{1,k}` centred at vertex 0.
    pub fn star(k: usize) -> Self {
        Self::from_fn(k + 1, |u, _| u == 0)
    }

    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.words + v / WORD] |= 1 << (v % WORD);
        self.adj[v * self.words + u / WORD] |= 1 << (u % WORD);
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    /// Bitset row of `v`'s neighbourhood.
    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> u64 {
        (0..self.n).map(|v| self.degree(v) as u64).sum::<u64>() / 2
    }

    /// Edge density `e(G) / C(n, 2)`; zero for fewer than two vertices.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edge_count() as f64 / choose2(self.n) as f64
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(v))
    }

    /// Edges `(u, v)` with `u < v`, ordered by `u` then `v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn complement(&self) -> Self {
        Self::from_fn(self.n, |u, v| !self.has_edge(u, v))
    }

    /// Subgraph induced on `vertices`, relabelled `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        for &v in vertices {
            self.check_vertex(v)?;
        }
        Ok(Self::from_fn(vertices.len(), |a, b| {
            self.has_edge(vertices[a], vertices[b])
        }))
    }

    /// Bitset of a vertex subset; repeated vertices collapse.
    pub fn mask(&self, set: &[usize]) -> Result<Vec<u64>> {
        let mut m = vec![0u64; self.words];
        for &v in set {
            self.check_vertex(v)?;
            m[v / WORD] |= 1 << (v % WORD);
        }
        Ok(m)
    }

    /// `e(U)`: number of edges with both endpoints in `set`.
    pub fn edge_count_within(&self, set: &[usize]) -> Result<u64> {
        let m = self.mask(set)?;
        let twice: u64 = iter_bits(&m).map(|u| and_count(self.row(u), &m)).sum();
        Ok(twice / 2)
    }

    /// `e(U, V)` for disjoint `U`, `V`.
    pub fn edge_count_between(&self, a: &[usize], b: &[usize]) -> Result<u64> {
        let ma = self.mask(a)?;
        let mb = self.mask(b)?;
        if let Some(v) = ma.iter().zip(&mb).enumerate().find_map(|(i, (x, y))| {
            let both = x & y;
            (both != 0).then(|| i * WORD + both.trailing_zeros() as usize)
        }) {
            return Err(Error::Overlap(v));
        }
        Ok(iter_bits(&ma).map(|u| and_count(self.row(u), &mb)).sum())
    }

    /// Edge density between two disjoint non-empty sets.
    pub fn pair_density(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::Precondition("pair density of an empty set".into()));
        }
        Ok(self.edge_count_between(a, b)? as f64 / (a.len() * b.len()) as f64)
    }
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as u64).sum()
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * WORD + b)
            }
        })
    })
}

pub fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of the pair `{i, j}` (`i != j`) in colexicographic order.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    b * (b - 1) / 2 + a
}

/// Inverse of [`pair_index`].
pub fn pair_at(index: usize) -> (usize, usize) {
    let mut b = 1;
    while (b + 1) * b / 2 <= index {
        b += 1;
    }
    (index - b * (b - 1) / 2, b)
}

/// Complete graph on `r` vertices with a weight in `[0, 1]` on every pair.
///
/// Weights are stored once per unordered pair, in colexicographic pair order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedGraph {
    r: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(r: usize, weights: Vec<f64>) -> Result<Self> {
        if r < 2 {
            return Err(Error::Parameter(format!("weighted graph needs r >= 2, got {r}")));
        }
        if weights.len() != choose2(r) {
            return Err(Error::Parameter(format!(
                "expected {} weights for r = {r}, got {}",
                choose2(r),
                weights.len()
            )));
        }
        for &w in &weights {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Probability(w));
            }
        }
        Ok(WeightedGraph { r, weights })
    }

    pub fn from_fn(r: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let weights = (0..choose2(r))
            .map(|k| {
                let (i, j) = pair_at(k);
                f(i, j)
            })
            .collect();
        Self::new(r, weights)
    }

    pub fn uniform(r: usize, w: f64) -> Result<Self> {
        Self::new(r, vec![w; choose2(r)])
    }

    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[pair_index(i, j)]
    }

    /// Weights in colexicographic pair order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Pairs `(i, j, w)` with `i < j` in colexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights.iter().enumerate().map(|(k, &w)| {
            let (i, j) = pair_at(k);
            (i, j, w)
        })
    }

    /// The weighted graph induced on `vertices`, relabelled in the given order.
    pub fn restrict(&self, vertices: &[usize]) -> Result<Self> {
        for &v in vertices {
            if v >= self.r {
                return Err(Error::VertexOutOfRange { vertex: v, n: self.r });
            }
        }
        Self::from_fn(vertices.len(), |a, b| self.weight(vertices[a], vertices[b]))
    }
}

/// Ordered list of pairwise-disjoint vertex sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexSetTuple {
    sets: Vec<Vec<usize>>,
}

impl VertexSetTuple {
    /// Disjoint sets of equal size, as used by the tuple statistics.
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        let t = Self::disjoint(sets)?;
        if let Some(first) = t.sets.first() {
            if t.sets.iter().any(|s| s.len() != first.len()) {
                return Err(Error::Precondition("tuple sets must have equal size".into()));
            }
        }
        Ok(t)
    }

    /// Disjoint sets of arbitrary sizes (e.g. the parts of an equipartition).
    pub fn disjoint(sets: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &sets {
            for &v in s {
                if !seen.insert(v) {
                    return Err(Error::Overlap(v));
                }
            }
        }
        Ok(VertexSetTuple { sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    /// Common set size, if all sets have one.
    pub fn common_size(&self) -> Option<usize> {
        let first = self.sets.first()?.len();
        self.sets.iter().all(|s| s.len() == first).then_some(first)
    }

    pub(crate) fn check_in(&self, g: &Graph) -> Result<()> {
        self.sets.iter().flatten().try_for_each(|&v| g.check_vertex(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn within_and_between_counts() {
        let k5 = Graph::complete(5);
        assert_eq!(k5.edge_count_within(&[0, 2, 4]).unwrap(), 3);
        let k44 = Graph::complete_bipartite(4, 4);
        assert_eq!(k44.edge_count_between(&[0, 1, 2, 3], &[4, 5, 6, 7]).unwrap(), 16);
        let c6 = Graph::cycle(6);
        assert_eq!(c6.edge_count_within(&[0, 2, 4]).unwrap(), 0);
        // brute-force oracle on the 6-cycle
        let brute = |set: &[usize]| {
            let mut c = 0;
            for (a, &u) in set.iter().enumerate() {
                for &v in &set[a + 1..] {
                    if (u + 1) % 6 == v || (v + 1) % 6 == u {
                        c += 1;
                    }
                }
            }
            c
        };
        for mask in 0u32..64 {
            let set: Vec<usize> = (0..6).filter(|&i| mask >> i & 1 == 1).collect();
            assert_eq!(c6.edge_count_within(&set).unwrap(), brute(&set));
        }
    }

    #[test]
    fn overlapping_between_is_rejected() {
        let g = Graph::complete(4);
        assert_eq!(g.edge_count_between(&[0, 1], &[1, 2]), Err(Error::Overlap(1)));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert_eq!(Graph::from_edges(3, [(1, 1)]), Err(Error::SelfLoop(1)));
        assert_eq!(Graph::from_edges(3, [(0, 1), (1, 0)]), Err(Error::DuplicateEdge(0, 1)));
        assert!(matches!(Graph::from_edges(3, [(0, 3)]), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn pair_index_is_colex_bijection() {
        let mut k = 0;
        for j in 1..12 {
            for i in 0..j {
                assert_eq!(pair_index(i, j), k);
                assert_eq!(pair_index(j, i), k);
                assert_eq!(pair_at(k), (i, j));
                k += 1;
            }
        }
    }

    #[test]
    fn tuple_validation() {
        assert!(VertexSetTuple::new(vec![vec![0, 1], vec![2, 3]]).is_ok());
        assert_eq!(VertexSetTuple::new(vec![vec![0, 1], vec![1, 3]]), Err(Error::Overlap(1)));
        assert!(VertexSetTuple::new(vec![vec![0, 1], vec![2]]).is_err());
        assert!(VertexSetTuple::disjoint(vec![vec![0, 1], vec![2]]).is_ok());
    }

    #[test]
    fn weighted_graph_validation() {
        assert!(WeightedGraph::new(3, vec![0.1, 0.2]).is_err());
        assert!(WeightedGraph::new(3, vec![0.1, 0.2, 1.5]).is_err());
        let w = WeightedGraph::from_fn(4, |i, j| (i + j) as f64 / 10.0).unwrap();
        assert_eq!(w.weight(3, 1), 0.4);
        assert_eq!(w.restrict(&[3, 1]).unwrap().weight(0, 1), 0.4);
    }
}
