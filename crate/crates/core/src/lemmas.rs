//! Desk-scale experiments on the supporting lemmas: pairwise-regular graphs,
//! `K_r` edge coverage, bichromatic cliques, the counting lemma, and the
//! partition-to-P1 step.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::graph::{choose2, iter_bits, Graph, VertexSetTuple, WeightedGraph};
use crate::pattern::{count_induced_phi, injective_maps, weighted_product, PatternGraph};
use crate::quasirandom::{check_p1, Budget, PropertyDeviation};
use crate::regularity::{spectral_witness_vectors, test_pair, PairRegularity, Partition, RegularityConfig};
use crate::rng::{substream, substream_indexed};

/// Largest `n` accepted by [`classify_pairwise_regular_up_to`].
pub const CLASSIFY_MAX_N: usize = 8;

fn pair_statistic(g: &Graph, outer: bool) -> Result<(bool, Option<usize>)> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Precondition("pairwise regularity needs n >= 2".into()));
    }
    let weight = if outer { 2 } else { 1 };
    let stat = |x: usize, y: usize| g.degree(x) + g.degree(y) - weight * g.has_edge(x, y) as usize;
    let t = stat(0, 1);
    for y in 1..n {
        for x in 0..y {
            if stat(x, y) != t {
                return Ok((false, None));
            }
        }
    }
    Ok((true, Some(t)))
}

/// Whether `d(x) + d(y) - [x ~ y]` is the same for all pairs, and that value.
pub fn is_pairwise_regular(g: &Graph) -> Result<(bool, Option<usize>)> {
    pair_statistic(g, false)
}

/// Whether `d(x) + d(y) - 2 [x ~ y]` is the same for all pairs, and that value.
pub fn is_pairwise_outer_regular(g: &Graph) -> Result<(bool, Option<usize>)> {
    pair_statistic(g, true)
}

/// Graph on `n <= 8` vertices stored as a colex pair bitmask.
fn graph_from_mask(n: usize, mask: u32) -> Graph {
    Graph::from_fn(n, |u, v| mask >> crate::graph::pair_index(u, v) & 1 == 1)
}

/// Predicate on adjacency rows; `weight` is 1 (pairwise) or 2 (outer).
fn mask_passes(n: usize, mask: u32, weight: u32) -> bool {
    let mut rows = [0u8; CLASSIFY_MAX_N];
    for v in 1..n {
        for u in 0..v {
            if mask >> crate::graph::pair_index(u, v) & 1 == 1 {
                rows[u] |= 1 << v;
                rows[v] |= 1 << u;
            }
        }
    }
    let deg = |v: usize| rows[v].count_ones();
    let adj = |x: usize, y: usize| (rows[x] >> y & 1) as u32;
    let t = deg(0) + deg(1) - weight * adj(0, 1);
    for y in 1..n {
        for x in 0..y {
            if deg(x) + deg(y) - weight * adj(x, y) != t {
                return false;
            }
        }
    }
    true
}

/// Smallest relabeled mask over all vertex permutations.
pub fn canonical_mask(n: usize, mask: u32) -> u32 {
    let edges: Vec<(usize, usize)> = (0..choose2(n))
        .filter(|&i| mask >> i & 1 == 1)
        .map(crate::graph::pair_at)
        .collect();
    let mut best = u32::MAX;
    for perm in injective_maps(n, n) {
        let t = perm.targets();
        let m = edges
            .iter()
            .fold(0u32, |acc, &(u, v)| acc | 1 << crate::graph::pair_index(t[u].min(t[v]), t[u].max(t[v])));
        best = best.min(m);
    }
    best
}

/// Isomorphism-invariant key of a graph on at most [`CLASSIFY_MAX_N`] vertices.
pub fn canonical_form(g: &Graph) -> Result<(usize, u32)> {
    if g.n() > CLASSIFY_MAX_N {
        return Err(Error::CapExceeded {
            what: format!("canonical form on {} vertices", g.n()),
            limit: format!("n <= {CLASSIFY_MAX_N}"),
        });
    }
    let mask = g.edges().fold(0u32, |m, (u, v)| m | 1 << crate::graph::pair_index(u, v));
    Ok((g.n(), canonical_mask(g.n(), mask)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifiedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub t: usize,
    pub complete: bool,
    pub empty: bool,
}

impl ClassifiedGraph {
    pub fn is_trivial(&self) -> bool {
        self.complete || self.empty
    }

    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.n, self.edges.iter().copied()).expect("stored edges are valid")
    }

    pub fn canonical_form(&self) -> (usize, u32) {
        canonical_form(&self.graph()).expect("classified graphs are small")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularClassification {
    pub n_max: usize,
    pub graphs_examined: u64,
    /// Isomorphism classes passing the pairwise-regular predicate, by `(n, canonical mask)`.
    pub pairwise_regular: Vec<ClassifiedGraph>,
    pub outer_regular: Vec<ClassifiedGraph>,
}

impl RegularClassification {
    pub fn nontrivial_pairwise(&self) -> Vec<&ClassifiedGraph> {
        self.pairwise_regular.iter().filter(|c| !c.is_trivial()).collect()
    }

    pub fn nontrivial_outer(&self) -> Vec<&ClassifiedGraph> {
        self.outer_regular.iter().filter(|c| !c.is_trivial()).collect()
    }
}

fn classify_size(n: usize, weight: u32) -> BTreeSet<u32> {
    let bits = choose2(n);
    let total: u64 = 1 << bits;
    const BLOCK: u64 = 1 << 14;
    (0..total.div_ceil(BLOCK))
        .into_par_iter()
        .map(|blk| {
            let mut found = BTreeSet::new();
            for mask in blk * BLOCK..((blk + 1) * BLOCK).min(total) {
                let mask = mask as u32;
                if mask_passes(n, mask, weight) {
                    found.insert(canonical_mask(n, mask));
                }
            }
            found
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

/// Every graph on `2..=n_max` vertices passing each predicate, up to isomorphism.
pub fn classify_pairwise_regular_up_to(n_max: usize) -> Result<RegularClassification> {
    if n_max > CLASSIFY_MAX_N {
        return Err(Error::CapExceeded {
            what: format!("graph enumeration up to {n_max} vertices"),
            limit: format!("n <= {CLASSIFY_MAX_N}"),
        });
    }
    let mut out = RegularClassification {
        n_max,
        graphs_examined: 0,
        pairwise_regular: Vec::new(),
        outer_regular: Vec::new(),
    };
    for n in 2..=n_max {
        out.graphs_examined += 1 << choose2(n);
        for (weight, list) in [(1u32, &mut out.pairwise_regular), (2, &mut out.outer_regular)] {
            for mask in classify_size(n, weight) {
                let g = graph_from_mask(n, mask);
                let (_, t) = pair_statistic(&g, weight == 2)?;
                list.push(ClassifiedGraph {
                    n,
                    edges: g.edges().collect(),
                    t: t.expect("predicate held"),
                    complete: g.edge_count() as usize == choose2(n),
                    empty: g.edge_count() == 0,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrCoverage {
    pub r: usize,
    pub edges: usize,
    /// Edges lying in at least one `K_r`.
    pub covered: usize,
    /// Greedy edge-disjoint `K_r` packing, in the order found.
    pub packing: Vec<Vec<usize>>,
}

/// Whether `cand` (a bitset) contains a clique of size `need`.
fn has_clique(g: &Graph, cand: &[u64], need: usize) -> bool {
    if need == 0 {
        return true;
    }
    let count: u32 = cand.iter().map(|w| w.count_ones()).sum();
    if (count as usize) < need {
        return false;
    }
    for v in iter_bits(cand) {
        let next: Vec<u64> = cand
            .iter()
            .zip(g.row(v))
            .enumerate()
            .map(|(i, (&c, &r))| {
                // only vertices after v, so each clique is tried once
                let after = if i * 64 > v {
                    u64::MAX
                } else if (i + 1) * 64 <= v {
                    0
                } else {
                    u64::MAX.checked_shl((v % 64 + 1) as u32).unwrap_or(0)
                };
                c & r & after
            })
            .collect();
        if has_clique(g, &next, need - 1) {
            return true;
        }
    }
    false
}

/// Exact per-edge `K_r` membership plus a greedy edge-disjoint packing.
pub fn kr_edge_coverage(g: &Graph, r: usize) -> Result<KrCoverage> {
    if r < 3 {
        return Err(Error::Parameter(format!("clique size must be >= 3, got {r}")));
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let covered = edges
        .par_iter()
        .filter(|&&(u, v)| {
            let common: Vec<u64> = g.row(u).iter().zip(g.row(v)).map(|(a, b)| a & b).collect();
            has_clique(g, &common, r - 2)
        })
        .count();
    let mut used = Graph::empty(g.n());
    let mut packing = Vec::new();
    let mut stack = Vec::with_capacity(r);
    greedy_pack(g, &mut used, r, 0, &mut stack, &mut packing);
    Ok(KrCoverage {
        r,
        edges: edges.len(),
        covered,
        packing,
    })
}

/// Lexicographic clique search; each completed clique whose edges are all
/// unused is taken immediately.
fn greedy_pack(g: &Graph, used: &mut Graph, r: usize, start: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if stack.len() == r {
        // prefix edges may have been consumed by a clique found deeper in this branch
        if stack.iter().enumerate().any(|(i, &a)| stack[i + 1..].iter().any(|&b| used.has_edge(a, b))) {
            return;
        }
        out.push(stack.clone());
        for (i, &a) in stack.iter().enumerate() {
            for &b in &stack[i + 1..] {
                used.set_edge(a, b);
            }
        }
        return;
    }
    for v in start..g.n() {
        if stack.iter().all(|&u| g.has_edge(u, v) && !used.has_edge(u, v)) {
            stack.push(v);
            greedy_pack(g, used, r, v + 1, stack, out);
            stack.pop();
        }
    }
}

/// Red/blue colouring of the edges of a base graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeColoring {
    base: Graph,
    blue: Graph,
}

impl EdgeColoring {
    /// `is_blue(u, v)` is asked once per base edge with `u < v`.
    pub fn new(base: Graph, mut is_blue: impl FnMut(usize, usize) -> bool) -> Self {
        let blue = Graph::from_fn(base.n(), |u, v| base.has_edge(u, v) && is_blue(u, v));
        EdgeColoring { base, blue }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn is_blue(&self, u: usize, v: usize) -> bool {
        self.blue.has_edge(u, v)
    }

    pub fn blue_count(&self) -> u64 {
        self.blue.edge_count()
    }

    pub fn red_count(&self) -> u64 {
        self.base.edge_count() - self.blue.edge_count()
    }

    /// `(red, blue)` counts inside `set`, or `None` if `set` is not a clique of the base.
    pub fn clique_colors(&self, set: &[usize]) -> Option<(usize, usize)> {
        let (mut red, mut blue) = (0, 0);
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                if !self.base.has_edge(a, b) {
                    return None;
                }
                if self.blue.has_edge(a, b) {
                    blue += 1;
                } else {
                    red += 1;
                }
            }
        }
        Some((red, blue))
    }
}

/// Colour exactly `floor(e/2)` of the base edges blue, chosen by a seeded shuffle.
pub fn balanced_coloring(base: Graph, seed: u64) -> EdgeColoring {
    let edges: Vec<(usize, usize)> = base.edges().collect();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(&mut substream(seed, "balanced_coloring"));
    let blue: BTreeSet<(usize, usize)> = order[..edges.len() / 2].iter().map(|&i| edges[i]).collect();
    EdgeColoring::new(base, |u, v| blue.contains(&(u, v)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BichromaticSearch {
    pub r: usize,
    pub trials: usize,
    /// Trials run before success (all of them on failure).
    pub trials_used: usize,
    /// Trials discarded because a vertex was drawn twice.
    pub collisions: usize,
    pub found: Option<Vec<usize>>,
}

/// Sample `r` vertices with repetition per trial, discard collisions, and stop at
/// the first clique with at least `r` red and `r` blue edges.
pub fn find_bichromatic_kr(coloring: &EdgeColoring, r: usize, trials: usize, seed: u64) -> Result<BichromaticSearch> {
    if r < 2 {
        return Err(Error::Parameter(format!("clique size must be >= 2, got {r}")));
    }
    if coloring.blue_count() == 0 || coloring.red_count() == 0 {
        return Err(Error::Precondition("colouring uses a single colour".into()));
    }
    let n = coloring.base().n();
    let mut out = BichromaticSearch {
        r,
        trials,
        trials_used: 0,
        collisions: 0,
        found: None,
    };
    for trial in 0..trials {
        out.trials_used = trial + 1;
        let mut rng = substream_indexed(seed, "bichromatic", trial as u64);
        let mut set: Vec<usize> = (0..r).map(|_| rng.random_range(0..n)).collect();
        set.sort_unstable();
        if set.windows(2).any(|w| w[0] == w[1]) {
            out.collisions += 1;
            continue;
        }
        if let Some((red, blue)) = coloring.clique_colors(&set) {
            if red >= r && blue >= r {
                out.found = Some(set);
                break;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiCount {
    pub phi: Vec<usize>,
    pub count: u128,
    pub normalized: f64,
    pub weight_product: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingReport {
    pub part_size: usize,
    pub phis_examined: usize,
    pub exhaustive: bool,
    pub max_deviation: f64,
    pub per_phi: Vec<PhiCount>,
}

/// Largest number of maps [`counting_lemma_experiment`] evaluates before sampling.
pub const COUNTING_PHI_LIMIT: usize = 256;

/// `r`-partite random graph with parts of `part_size` vertices (part `i` is
/// `i*part_size..(i+1)*part_size`) and cross pairs present with probability `w(i, j)`.
pub fn random_partite(w: &WeightedGraph, part_size: usize, seed: u64) -> Graph {
    let mut rng = substream(seed, "partite");
    Graph::from_fn(w.r() * part_size, |u, v| {
        let (a, b) = (u / part_size, v / part_size);
        a != b && rng.random::<f64>() < w.weight(a, b)
    })
}

/// Sample an `r`-partite graph with densities `w` and compare `H*_phi / s^h`
/// against `W(phi)` for every map (or a seeded sample of [`COUNTING_PHI_LIMIT`]).
pub fn counting_lemma_experiment(w: &WeightedGraph, pattern: &PatternGraph, part_size: usize, seed: u64) -> Result<CountingReport> {
    if part_size < pattern.h() {
        return Err(Error::Parameter(format!(
            "part size {part_size} is smaller than the pattern's {} vertices",
            pattern.h()
        )));
    }
    if w.r() < pattern.h() {
        return Err(Error::Parameter(format!("need r >= h, got r = {}, h = {}", w.r(), pattern.h())));
    }
    let g = random_partite(w, part_size, seed);
    let sets = VertexSetTuple::new((0..w.r()).map(|i| (i * part_size..(i + 1) * part_size).collect()).collect())?;
    let mut phis = injective_maps(pattern.h(), w.r());
    let exhaustive = phis.len() <= COUNTING_PHI_LIMIT;
    if !exhaustive {
        let mut rng = substream(seed, "counting_phi");
        let picked = rand::seq::index::sample(&mut rng, phis.len(), COUNTING_PHI_LIMIT).into_vec();
        let mut picked = picked;
        picked.sort_unstable();
        phis = picked.into_iter().map(|i| phis[i].clone()).collect();
    }
    let scale = (part_size as f64).powi(pattern.h() as i32);
    let per_phi: Vec<PhiCount> = phis
        .par_iter()
        .map(|phi| {
            let count = count_induced_phi(&g, pattern, &sets, phi)?;
            let wp = weighted_product(w, pattern, phi)?;
            let normalized = count as f64 / scale;
            Ok(PhiCount {
                phi: phi.targets().to_vec(),
                count,
                normalized,
                weight_product: wp,
                deviation: (normalized - wp).abs(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(CountingReport {
        part_size,
        phis_examined: per_phi.len(),
        exhaustive,
        max_deviation: per_phi.iter().map(|c| c.deviation).fold(0.0, f64::max),
        per_phi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFlag {
    pub i: usize,
    pub j: usize,
    pub regularity: PairRegularity,
    pub density_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionP1Report {
    pub k: usize,
    pub pairs: Vec<PairFlag>,
    /// Fraction of pairs that are regular with density `p ± eps`.
    pub super_regular_fraction: f64,
    /// Whether at most `eps C(k,2)` pairs fail.
    pub super_regular: bool,
    /// P1 check, run only when the partition is super-regular.
    pub p1: Option<PropertyDeviation>,
}

/// Flag each pair of parts as `eps`-regular with density `p ± eps`; when all but
/// `eps C(k,2)` pairs pass, measure P1 directly.
pub fn check_partition_p1(g: &Graph, partition: &Partition, p: f64, eps: f64, budget: Budget) -> Result<PartitionP1Report> {
    check_probability(p)?;
    if partition.k() < 2 {
        return Err(Error::Precondition("partition needs at least 2 parts".into()));
    }
    if partition.parts().iter().map(Vec::len).sum::<usize>() != g.n() {
        return Err(Error::Precondition("partition does not cover the graph".into()));
    }
    let cfg = RegularityConfig {
        gamma: eps,
        random_candidates: 8,
        seed: match budget {
            Budget::Sampled { seed, .. } => seed,
            Budget::Exhaustive => 0,
        },
    };
    let vectors = spectral_witness_vectors(g, 2)?;
    let k = partition.k();
    let index: Vec<(usize, usize)> = (1..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let pairs: Vec<PairFlag> = index
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, j))| {
            let regularity = test_pair(g, partition.part(i), partition.part(j), &cfg, &vectors, idx as u64)?;
            Ok(PairFlag {
                i,
                j,
                density_ok: (regularity.density - p).abs() <= eps,
                regularity,
            })
        })
        .collect::<Result<_>>()?;
    let good = pairs.iter().filter(|f| f.density_ok && f.regularity.regular).count();
    let total = pairs.len();
    let super_regular = (total - good) as f64 <= eps * total as f64;
    let p1 = if super_regular { Some(check_p1(g, p, budget)?) } else { None };
    Ok(PartitionP1Report {
        k,
        super_regular_fraction: good as f64 / total as f64,
        super_regular,
        pairs,
        p1,
    })
}

/// Exhaustive oracle: does any `r`-clique of the base carry at least `r` edges of each colour?
pub fn bichromatic_kr_exists(coloring: &EdgeColoring, r: usize) -> bool {
    let n = coloring.base().n();
    fn rec(c: &EdgeColoring, r: usize, n: usize, start: usize, set: &mut Vec<usize>) -> bool {
        if set.len() == r {
            return matches!(c.clique_colors(set), Some((red, blue)) if red >= r && blue >= r);
        }
        for v in start..n {
            if set.iter().all(|&u| c.base().has_edge(u, v)) {
                set.push(v);
                if rec(c, r, n, v + 1, set) {
                    return true;
                }
                set.pop();
            }
        }
        false
    }
    rec(coloring, r, n, 0, &mut Vec::new())
}
