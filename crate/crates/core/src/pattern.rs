//! Fixed patterns `H` and exact counting of their (induced) labeled copies.
//!
//! All counts are of *labeled* copies: injective placements of the pattern's
//! vertices. Unlabeled copies are `labeled / |Aut(H)|`; that quotient is not
//! computed here.
//!
//! The counting engine backtracks over pattern vertices in a static
//! degree-descending order. At each level the admissible targets are the
//! intersection of the level's candidate set with the neighbourhoods (and, for
//! induced counts, non-neighbourhoods) of the already placed vertices, so the
//! innermost level is a single popcount. [`naive`] holds the nested-loop
//! reference that the tests compare against.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{choose2, iter_bits, Graph, VertexSetTuple, WeightedGraph, WORD};

/// Largest pattern the engine accepts.
pub const MAX_PATTERN_VERTICES: usize = 16;

/// A fixed pattern graph `H` on vertices `0..h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternGraph {
    name: String,
    h: usize,
    #[serde(skip)]
    adj: Vec<u32>,
    edges: Vec<(usize, usize)>,
}

impl PatternGraph {
    pub fn from_graph(name: impl Into<String>, g: &Graph) -> Result<Self> {
        let h = g.n();
        if h < 2 {
            return Err(Error::Parameter(format!("pattern needs at least 2 vertices, got {h}")));
        }
        if h > MAX_PATTERN_VERTICES {
            return Err(Error::CapExceeded {
                what: format!("pattern with {h} vertices"),
                limit: format!("{MAX_PATTERN_VERTICES} vertices"),
            });
        }
        let adj = (0..h)
            .map(|v| g.neighbors(v).fold(0u32, |acc, u| acc | 1 << u))
            .collect();
        Ok(PatternGraph {
            name: name.into(),
            h,
            adj,
            edges: g.edges().collect(),
        })
    }

    pub fn from_edges(name: impl Into<String>, h: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_graph(name, &Graph::from_edges(h, edges.iter().copied())?)
    }

    /// Parses a builtin name: `path3`, `cycle4`, `clique:h`, `star:k`, `empty:h`,
    /// plus the general forms `path:h` and `cycle:h`.
    pub fn builtin(spec: &str) -> Result<Self> {
        let unknown = || Error::Unknown { kind: "pattern", name: spec.to_string() };
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k, Some(a.parse::<usize>().map_err(|_| unknown())?)),
            None => (spec, None),
        };
        let g = match (kind, arg) {
            ("path3", None) => Graph::path(3),
            ("cycle4", None) => Graph::cycle(4),
            ("path", Some(h)) if h >= 2 => Graph::path(h),
            ("cycle", Some(h)) if h >= 3 => Graph::cycle(h),
            ("clique", Some(h)) => Graph::complete(h),
            ("empty", Some(h)) => Graph::empty(h),
            ("star", Some(k)) if k >= 1 => Graph::star(k),
            _ => return Err(unknown()),
        };
        Self::from_graph(spec, &g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Number of edges `m`.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// `C(h, 2)`.
    pub fn total_pairs(&self) -> usize {
        choose2(self.h)
    }

    pub fn non_edges(&self) -> usize {
        self.total_pairs() - self.m()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].count_ones() as usize
    }

    /// `gcd(C(h, 2), m)`.
    pub fn pairs_edges_gcd(&self) -> usize {
        gcd(self.total_pairs(), self.m())
    }

    /// Complete or edgeless: the conjugate density coincides with `p`.
    pub fn is_trivial(&self) -> bool {
        self.m() == 0 || self.m() == self.total_pairs()
    }

    pub fn as_graph(&self) -> Graph {
        Graph::from_fn(self.h, |u, v| self.is_edge(u, v))
    }

    pub fn complement(&self) -> Self {
        let name = format!("complement({})", self.name);
        Self::from_graph(name, &self.as_graph().complement()).expect("complement of a valid pattern")
    }

    /// Static placement order: degree-descending, ties by index.
    fn order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.h).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(self.degree(v)), v));
        order
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// An injective map `[h] -> [r]`; with `r = h` it is a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InjectiveMap {
    targets: Vec<usize>,
}

impl InjectiveMap {
    pub fn new(targets: Vec<usize>, r: usize) -> Result<Self> {
        let mut seen = 0u64;
        for &t in &targets {
            if t >= r || t >= 64 || seen >> t & 1 == 1 {
                return Err(Error::NotInjective(targets));
            }
            seen |= 1 << t;
        }
        Ok(InjectiveMap { targets })
    }

    pub fn permutation(targets: Vec<usize>) -> Result<Self> {
        let h = targets.len();
        Self::new(targets.clone(), h).map_err(|_| Error::NotPermutation { map: targets, h })
    }

    pub fn identity(h: usize) -> Self {
        InjectiveMap { targets: (0..h).collect() }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.targets[i]
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Bitmask of the image.
    pub fn image_mask(&self) -> u64 {
        self.targets.iter().fold(0, |m, &t| m | 1 << t)
    }
}

/// All injective maps `[h] -> [r]` in lexicographic order; there are `r!/(r-h)!`.
pub fn injective_maps(h: usize, r: usize) -> Vec<InjectiveMap> {
    fn rec(h: usize, r: usize, cur: &mut Vec<usize>, used: u64, out: &mut Vec<InjectiveMap>) {
        if cur.len() == h {
            out.push(InjectiveMap { targets: cur.clone() });
            return;
        }
        for t in 0..r {
            if used >> t & 1 == 0 {
                cur.push(t);
                rec(h, r, cur, used | 1 << t, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if h <= r && r <= 64 {
        rec(h, r, &mut Vec::with_capacity(h), 0, &mut out);
    }
    out
}

pub fn permutations(h: usize) -> Vec<InjectiveMap> {
    injective_maps(h, h)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Labeled,
    Induced,
}

struct Engine<'a> {
    g: &'a Graph,
    pattern: &'a PatternGraph,
    order: Vec<usize>,
    cand: Vec<Vec<u64>>,
    mode: Mode,
}

impl Engine<'_> {
    fn count(&self) -> u128 {
        let h = self.pattern.h;
        let first = self.order[0];
        if h == 1 {
            return iter_bits(&self.cand[first]).count() as u128;
        }
        let roots: Vec<usize> = iter_bits(&self.cand[first]).collect();
        let run = |chunk: &[usize]| {
            let mut scratch = Scratch::new(h, self.g.words());
            chunk
                .iter()
                .map(|&v| {
                    scratch.placed[first] = v;
                    scratch.used.fill(0);
                    scratch.used[v / WORD] |= 1 << (v % WORD);
                    self.descend(1, &mut scratch)
                })
                .sum::<u128>()
        };
        if roots.len() >= 64 && self.g.n() >= 128 {
            roots.par_chunks(8).map(run).sum()
        } else {
            run(&roots)
        }
    }

    fn descend(&self, depth: usize, s: &mut Scratch) -> u128 {
        let x = self.order[depth];
        let words = self.g.words();
        {
            let Scratch { placed, used, levels } = &mut *s;
            let mask = &mut levels[depth * words..(depth + 1) * words];
            for (m, (c, u)) in mask.iter_mut().zip(self.cand[x].iter().zip(used.iter())) {
                *m = c & !u;
            }
            for &y in &self.order[..depth] {
                let row = self.g.row(placed[y]);
                if self.pattern.is_edge(x, y) {
                    mask.iter_mut().zip(row).for_each(|(m, r)| *m &= r);
                } else if self.mode == Mode::Induced {
                    mask.iter_mut().zip(row).for_each(|(m, r)| *m &= !r);
                }
            }
        }
        let mask = &s.levels[depth * words..(depth + 1) * words];
        if depth + 1 == self.pattern.h {
            return mask.iter().map(|w| w.count_ones() as u128).sum();
        }
        let targets: Vec<usize> = iter_bits(mask).collect();
        let mut total = 0;
        for v in targets {
            s.placed[x] = v;
            s.used[v / WORD] |= 1 << (v % WORD);
            total += self.descend(depth + 1, s);
            s.used[v / WORD] &= !(1 << (v % WORD));
        }
        total
    }
}

struct Scratch {
    placed: Vec<usize>,
    used: Vec<u64>,
    levels: Vec<u64>,
}

impl Scratch {
    fn new(h: usize, words: usize) -> Self {
        Scratch {
            placed: vec![0; h],
            used: vec![0; words],
            levels: vec![0; h * words],
        }
    }
}

fn run(g: &Graph, pattern: &PatternGraph, cand: Vec<Vec<u64>>, mode: Mode) -> u128 {
    Engine {
        g,
        pattern,
        order: pattern.order(),
        cand,
        mode,
    }
    .count()
}

fn check_arity(tuple: &VertexSetTuple, expected: usize) -> Result<()> {
    if tuple.len() != expected {
        return Err(Error::Arity { expected, got: tuple.len() });
    }
    Ok(())
}

/// `H[U]`: injective maps `V(H) -> U` sending edges to edges.
pub fn count_labeled(g: &Graph, pattern: &PatternGraph, set: &[usize]) -> Result<u128> {
    let m = g.mask(set)?;
    Ok(run(g, pattern, vec![m; pattern.h], Mode::Labeled))
}

/// `H*[U]`: injective maps `V(H) -> U` preserving edges and non-edges.
pub fn count_induced(g: &Graph, pattern: &PatternGraph, set: &[usize]) -> Result<u128> {
    let m = g.mask(set)?;
    Ok(run(g, pattern, vec![m; pattern.h], Mode::Induced))
}

/// `H[U_1, ..., U_h]`: placements with pattern vertex `i` in `U_i` spanning a labeled copy.
pub fn count_labeled_tuple(g: &Graph, pattern: &PatternGraph, tuple: &VertexSetTuple) -> Result<u128> {
    check_arity(tuple, pattern.h)?;
    tuple.check_in(g)?;
    let cand = tuple.sets().iter().map(|s| g.mask(s)).collect::<Result<_>>()?;
    Ok(run(g, pattern, cand, Mode::Labeled))
}

/// `H*_sigma[U_1, ..., U_h]`: placements with pattern vertex `i` in `U_sigma(i)`
/// whose adjacency matches `H` exactly.
pub fn count_induced_sigma(
    g: &Graph,
    pattern: &PatternGraph,
    tuple: &VertexSetTuple,
    sigma: &InjectiveMap,
) -> Result<u128> {
    check_arity(tuple, pattern.h)?;
    if sigma.len() != pattern.h || InjectiveMap::permutation(sigma.targets.clone()).is_err() {
        return Err(Error::NotPermutation { map: sigma.targets.clone(), h: pattern.h });
    }
    induced_on_sets(g, pattern, tuple, sigma)
}

/// `H*_phi[U_1, ..., U_r]` for an injective `phi: [h] -> [r]`.
pub fn count_induced_phi(
    g: &Graph,
    pattern: &PatternGraph,
    sets: &VertexSetTuple,
    phi: &InjectiveMap,
) -> Result<u128> {
    if sets.len() < pattern.h {
        return Err(Error::Arity { expected: pattern.h, got: sets.len() });
    }
    if phi.len() != pattern.h {
        return Err(Error::Parameter(format!(
            "map has length {}, pattern has {} vertices",
            phi.len(),
            pattern.h
        )));
    }
    InjectiveMap::new(phi.targets.clone(), sets.len())?;
    induced_on_sets(g, pattern, sets, phi)
}

fn induced_on_sets(g: &Graph, pattern: &PatternGraph, sets: &VertexSetTuple, map: &InjectiveMap) -> Result<u128> {
    sets.check_in(g)?;
    let cand = map
        .targets
        .iter()
        .map(|&t| g.mask(sets.set(t)))
        .collect::<Result<_>>()?;
    Ok(run(g, pattern, cand, Mode::Induced))
}

/// `W(phi)`: product over pattern edges of `w(phi(i), phi(j))` times product over
/// non-edges of `1 - w(phi(i), phi(j))`.
pub fn weighted_product(w: &WeightedGraph, pattern: &PatternGraph, phi: &InjectiveMap) -> Result<f64> {
    if phi.len() != pattern.h {
        return Err(Error::Parameter(format!(
            "map has length {}, pattern has {} vertices",
            phi.len(),
            pattern.h
        )));
    }
    InjectiveMap::new(phi.targets.clone(), w.r())?;
    Ok(weighted_product_unchecked(w, pattern, phi.targets()))
}

pub(crate) fn weighted_product_unchecked(w: &WeightedGraph, pattern: &PatternGraph, targets: &[usize]) -> f64 {
    let mut prod = 1.0;
    for j in 1..pattern.h {
        for i in 0..j {
            let x = w.weight(targets[i], targets[j]);
            prod *= if pattern.is_edge(i, j) { x } else { 1.0 - x };
        }
    }
    prod
}

/// Nested-loop reference counts.
///
/// Every function here walks all `|candidates|^h` placements with an odometer
/// and tests the predicate pair by pair. It is deliberately independent of the
/// bitset engine and is what the property and acceptance tests compare against.
pub mod naive {
    use super::PatternGraph;
    use crate::graph::Graph;

    fn odometer(
        g: &Graph,
        pattern: &PatternGraph,
        candidates: &[Vec<usize>],
        induced: bool,
    ) -> u128 {
        let h = pattern.h();
        if candidates.iter().any(|c| c.is_empty()) {
            return 0;
        }
        let mut idx = vec![0usize; h];
        let mut total = 0u128;
        loop {
            let vs: Vec<usize> = (0..h).map(|i| candidates[i][idx[i]]).collect();
            let mut ok = true;
            'pairs: for i in 0..h {
                for j in (i + 1)..h {
                    if vs[i] == vs[j] {
                        ok = false;
                        break 'pairs;
                    }
                    let adjacent = g.has_edge(vs[i], vs[j]);
                    let want = pattern.is_edge(i, j);
                    if (want && !adjacent) || (induced && !want && adjacent) {
                        ok = false;
                        break 'pairs;
                    }
                }
            }
            if ok {
                total += 1;
            }
            let mut k = 0;
            loop {
                if k == h {
                    return total;
                }
                idx[k] += 1;
                if idx[k] < candidates[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    pub fn labeled(g: &Graph, pattern: &PatternGraph, set: &[usize]) -> u128 {
        odometer(g, pattern, &vec![set.to_vec(); pattern.h()], false)
    }

    pub fn induced(g: &Graph, pattern: &PatternGraph, set: &[usize]) -> u128 {
        odometer(g, pattern, &vec![set.to_vec(); pattern.h()], true)
    }

    pub fn labeled_tuple(g: &Graph, pattern: &PatternGraph, sets: &[Vec<usize>]) -> u128 {
        odometer(g, pattern, sets, false)
    }

    /// Pattern vertex `i` ranges over `sets[map[i]]`; covers both the
    /// permutation and the general injective case.
    pub fn induced_mapped(g: &Graph, pattern: &PatternGraph, sets: &[Vec<usize>], map: &[usize]) -> u128 {
        let cands: Vec<Vec<usize>> = map.iter().map(|&t| sets[t].clone()).collect();
        odometer(g, pattern, &cands, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn labeled_examples() {
        let k3 = PatternGraph::builtin("clique:3").unwrap();
        let k2 = PatternGraph::builtin("clique:2").unwrap();
        let p3 = PatternGraph::builtin("path3").unwrap();
        assert_eq!(count_labeled(&Graph::complete(4), &k3, &all(4)).unwrap(), 24);
        assert_eq!(count_labeled(&Graph::cycle(4), &k2, &all(4)).unwrap(), 8);
        // 5 middle vertices x 2 orientations of the remaining two neighbours
        assert_eq!(naive::labeled(&Graph::cycle(5), &p3, &all(5)), 10);
        assert_eq!(count_labeled(&Graph::cycle(5), &p3, &all(5)).unwrap(), 10);
    }

    #[test]
    fn induced_examples() {
        let k2 = PatternGraph::builtin("clique:2").unwrap();
        let p3 = PatternGraph::builtin("path3").unwrap();
        assert_eq!(count_induced(&Graph::complete(3), &k2, &all(3)).unwrap(), 6);
        assert_eq!(count_induced(&Graph::complete(3), &p3, &all(3)).unwrap(), 0);
        assert_eq!(naive::induced(&Graph::cycle(4), &p3, &all(4)), 8);
        assert_eq!(count_induced(&Graph::cycle(4), &p3, &all(4)).unwrap(), 8);
        assert_eq!(count_induced(&Graph::complete(3), &p3, &[0, 1]).unwrap(), 0);
    }

    #[test]
    fn tuple_examples() {
        let k2 = PatternGraph::builtin("clique:2").unwrap();
        let p3 = PatternGraph::builtin("path3").unwrap();
        let edge = Graph::complete(2);
        let t = VertexSetTuple::new(vec![vec![0], vec![1]]).unwrap();
        assert_eq!(count_labeled_tuple(&edge, &k2, &t).unwrap(), 1);
        assert_eq!(count_labeled_tuple(&Graph::empty(2), &k2, &t).unwrap(), 0);

        let path = Graph::path(3);
        let t3 = VertexSetTuple::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(count_labeled_tuple(&path, &p3, &t3).unwrap(), 1);
        let id = InjectiveMap::identity(3);
        assert_eq!(count_induced_sigma(&path, &p3, &t3, &id).unwrap(), 1);
        // pattern centre lands on the leaf `a`
        let swap = InjectiveMap::permutation(vec![1, 0, 2]).unwrap();
        assert_eq!(count_induced_sigma(&path, &p3, &t3, &swap).unwrap(), 0);
        assert_eq!(count_induced_phi(&path, &p3, &t3, &id).unwrap(), 1);

        let k4 = Graph::complete(4);
        let halves = VertexSetTuple::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        for sigma in permutations(2) {
            assert_eq!(count_induced_sigma(&k4, &k2, &halves, &sigma).unwrap(), 4);
        }
        assert_eq!(
            count_induced_phi(&Graph::empty(4), &k2, &halves, &InjectiveMap::identity(2)).unwrap(),
            0
        );
    }

    #[test]
    fn argument_validation() {
        let p3 = PatternGraph::builtin("path3").unwrap();
        let g = Graph::path(3);
        let t2 = VertexSetTuple::new(vec![vec![0], vec![1]]).unwrap();
        assert!(matches!(count_labeled_tuple(&g, &p3, &t2), Err(Error::Arity { .. })));
        let t3 = VertexSetTuple::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        let bad = InjectiveMap { targets: vec![0, 0, 1] };
        assert!(matches!(count_induced_sigma(&g, &p3, &t3, &bad), Err(Error::NotPermutation { .. })));
        assert!(InjectiveMap::new(vec![0, 3], 3).is_err());
        assert!(InjectiveMap::permutation(vec![0, 2]).is_err());
    }

    #[test]
    fn weighted_product_examples() {
        let p3 = PatternGraph::builtin("path3").unwrap();
        let half = WeightedGraph::uniform(4, 0.5).unwrap();
        let phi = InjectiveMap::new(vec![2, 0, 3], 4).unwrap();
        assert_eq!(weighted_product(&half, &p3, &phi).unwrap(), 0.125);
        let zero = WeightedGraph::from_fn(4, |i, j| if (i, j) == (0, 2) { 0.0 } else { 0.5 }).unwrap();
        assert_eq!(weighted_product(&zero, &p3, &phi).unwrap(), 0.0);
    }

    #[test]
    fn builtins() {
        assert_eq!(PatternGraph::builtin("star:3").unwrap().m(), 3);
        assert_eq!(PatternGraph::builtin("empty:4").unwrap().m(), 0);
        assert_eq!(PatternGraph::builtin("cycle:5").unwrap().m(), 5);
        assert_eq!(PatternGraph::builtin("cycle4").unwrap().pairs_edges_gcd(), 2);
        assert_eq!(PatternGraph::builtin("path3").unwrap().pairs_edges_gcd(), 1);
        assert!(PatternGraph::builtin("wheel:5").is_err());
        assert!(PatternGraph::builtin("clique:x").is_err());
    }

    #[test]
    fn map_counts() {
        assert_eq!(injective_maps(3, 6).len(), 120);
        assert_eq!(permutations(4).len(), 24);
        assert!(injective_maps(4, 3).is_empty());
    }
}
