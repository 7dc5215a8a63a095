//! Vertex partitions and `gamma`-regularity tests for pairs of parts.
//!
//! A pair `(A, B)` is `gamma`-regular when every `A' ⊆ A`, `B' ⊆ B` with
//! `|A'| >= gamma |A|`, `|B'| >= gamma |B|` has `|d(A', B') - d(A, B)| <= gamma`.
//!
//! Small pairs are decided exactly. For larger pairs the test can only refute:
//! it evaluates a fixed family of half-size candidate sub-pairs and reports the
//! largest density gap it saw.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{substream, substream_indexed};

/// Largest part size decided exactly.
pub const EXHAUSTIVE_PART_MAX: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    parts: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates that `parts` are disjoint, cover `0..n`, and differ in size by at most one.
    pub fn new(parts: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for part in &parts {
            for &v in part {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::Overlap(v));
                }
            }
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(Error::Precondition(format!("vertex {v} is in no part")));
        }
        let (lo, hi) = parts
            .iter()
            .map(Vec::len)
            .fold((usize::MAX, 0), |(lo, hi), s| (lo.min(s), hi.max(s)));
        if !parts.is_empty() && hi - lo > 1 {
            return Err(Error::Precondition(format!("part sizes range from {lo} to {hi}; not an equipartition")));
        }
        let mut parts = parts;
        parts.iter_mut().for_each(|p| p.sort_unstable());
        Ok(Partition { parts })
    }

    /// Cut a vertex ordering into `k` consecutive chunks whose sizes differ by at most one.
    pub fn from_order(order: &[usize], k: usize) -> Result<Self> {
        if k == 0 || k > order.len() {
            return Err(Error::Parameter(format!("cannot split {} vertices into {k} parts", order.len())));
        }
        let n = order.len();
        let parts = (0..k).map(|i| order[i * n / k..(i + 1) * n / k].to_vec()).collect();
        Partition::new(parts, n)
    }

    /// Uniformly random equipartition from the `"equipartition"` substream of `seed`.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut substream(seed, "equipartition"));
        Partition::from_order(&order, k)
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityMode {
    Exhaustive,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityConfig {
    pub gamma: f64,
    /// Random half-splits tried per pair in heuristic mode.
    pub random_candidates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRegularity {
    pub density: f64,
    /// `false` only when a sub-pair with gap above `gamma` was found.
    pub regular: bool,
    pub mode: RegularityMode,
    /// Largest `|d(A', B') - d(A, B)|` seen.
    pub max_gap: f64,
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

fn min_size(gamma: f64, len: usize) -> usize {
    ((gamma * len as f64).ceil() as usize).clamp(1, len)
}

/// Exact test: every admissible `A'` of the smaller side, with the best
/// responses `B'` (top and bottom `t` neighbour counts) on the other.
fn exhaustive_pair(g: &Graph, a: &[usize], b: &[usize], gamma: f64, density: f64) -> PairRegularity {
    let (small, large, swapped) = if a.len() <= b.len() { (a, b, false) } else { (b, a, true) };
    let s_min = min_size(gamma, small.len());
    let t = min_size(gamma, large.len());
    let mut best = (0.0f64, 0u32, Vec::new());
    for mask in 1u32..1 << small.len() {
        let size = mask.count_ones() as usize;
        if size < s_min {
            continue;
        }
        let mut counts: Vec<(u32, usize)> = large
            .iter()
            .map(|&v| {
                let c = (0..small.len())
                    .filter(|&i| mask >> i & 1 == 1 && g.has_edge(small[i], v))
                    .count() as u32;
                (c, v)
            })
            .collect();
        counts.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        let denom = (size * t) as f64;
        for chosen in [&counts[..t], &counts[counts.len() - t..]] {
            let d = chosen.iter().map(|&(c, _)| c as f64).sum::<f64>() / denom;
            let gap = (d - density).abs();
            if gap > best.0 {
                best = (gap, mask, chosen.iter().map(|&(_, v)| v).collect());
            }
        }
    }
    let (gap, mask, other) = best;
    let witness = (gap > 0.0).then(|| {
        let mut side: Vec<usize> = (0..small.len()).filter(|&i| mask >> i & 1 == 1).map(|i| small[i]).collect();
        let mut other = other;
        side.sort_unstable();
        other.sort_unstable();
        if swapped { (other, side) } else { (side, other) }
    });
    PairRegularity {
        density,
        regular: gap <= gamma,
        mode: RegularityMode::Exhaustive,
        max_gap: gap,
        witness,
    }
}

/// Top and bottom `size` members of `set` ranked by `score`.
fn ranked_halves(set: &[usize], score: impl Fn(usize) -> f64, size: usize) -> [Vec<usize>; 2] {
    let mut order: Vec<(f64, usize)> = set.iter().enumerate().map(|(i, &v)| (score(i), v)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut top: Vec<usize> = order[..size].iter().map(|x| x.1).collect();
    let mut bottom: Vec<usize> = order[order.len() - size..].iter().map(|x| x.1).collect();
    top.sort_unstable();
    bottom.sort_unstable();
    [top, bottom]
}

/// Refutation-only test over candidate sub-pairs: ranked halves of each
/// supplied global vector, and random halves.
/// Top and bottom candidate subsets of one side.
type Halves = [Vec<usize>; 2];

fn heuristic_pair(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    cfg: &RegularityConfig,
    density: f64,
    global_vectors: &[Vec<f64>],
    pair_index: u64,
) -> Result<PairRegularity> {
    let sa = min_size(cfg.gamma, a.len()).max(a.len().div_ceil(2));
    let sb = min_size(cfg.gamma, b.len()).max(b.len().div_ceil(2));
    let mut candidates: Vec<(Halves, Halves)> = Vec::new();
    for v in global_vectors {
        candidates.push((ranked_halves(a, |i| v[a[i]], sa), ranked_halves(b, |j| v[b[j]], sb)));
    }
    let mut rng = substream_indexed(cfg.seed, "regularity", pair_index);
    for _ in 0..cfg.random_candidates {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        x.shuffle(&mut rng);
        y.shuffle(&mut rng);
        let mut x = x[..sa].to_vec();
        let mut y = y[..sb].to_vec();
        x.sort_unstable();
        y.sort_unstable();
        candidates.push(([x, Vec::new()], [y, Vec::new()]));
    }
    let mut best = (0.0f64, None);
    for (xs, ys) in &candidates {
        for x in xs.iter().filter(|x| !x.is_empty()) {
            for y in ys.iter().filter(|y| !y.is_empty()) {
                let gap = (g.pair_density(x, y)? - density).abs();
                if gap > best.0 {
                    best = (gap, Some((x.clone(), y.clone())));
                }
            }
        }
    }
    Ok(PairRegularity {
        density,
        regular: best.0 <= cfg.gamma,
        mode: RegularityMode::Heuristic,
        max_gap: best.0,
        witness: best.1,
    })
}

/// Test one pair of disjoint parts. Parts of at most [`EXHAUSTIVE_PART_MAX`]
/// vertices are decided exactly; larger ones by [`RegularityMode::Heuristic`].
///
/// `global_vectors` are per-vertex scores (indexed by vertex) used to propose
/// sub-pairs in heuristic mode; `pair_index` keys the random candidates.
pub fn test_pair(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    cfg: &RegularityConfig,
    global_vectors: &[Vec<f64>],
    pair_index: u64,
) -> Result<PairRegularity> {
    if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
        return Err(Error::Parameter(format!("gamma must lie in (0, 1], got {}", cfg.gamma)));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("regularity test needs non-empty parts".into()));
    }
    if let Some(v) = global_vectors.iter().find(|v| v.len() != g.n()) {
        return Err(Error::Arity { expected: g.n(), got: v.len() });
    }
    let density = g.pair_density(a, b)?;
    if a.len().max(b.len()) <= EXHAUSTIVE_PART_MAX {
        Ok(exhaustive_pair(g, a, b, cfg.gamma, density))
    } else {
        heuristic_pair(g, a, b, cfg, density, global_vectors, pair_index)
    }
}

/// Eigenvalues at most this multiple of `sigma sqrt(n)` are treated as noise;
/// a random graph's centred spectrum ends near `2 sigma sqrt(n)`.
pub const SPECTRAL_NOISE_FACTOR: f64 = 2.5;

/// Eigenpairs of `A - d (J - I)` (`d` the edge density) for the `count`
/// eigenvalues of largest modulus; vectors are indexed by vertex.
pub fn centered_top_eigenpairs(g: &Graph, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = g.n();
    if n == 0 || count == 0 {
        return Ok(Vec::new());
    }
    let d = g.density();
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { g.has_edge(i, j) as u8 as f64 - d });
    let eig = SymmetricEigen::try_new(m, 1e-12, 10_000 * n).ok_or(Error::EigenNonConvergence)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].abs().total_cmp(&eig.eigenvalues[x].abs()).then(x.cmp(&y)));
    Ok(idx
        .into_iter()
        .take(count)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
        .collect())
}

/// Leading centred eigenvectors whose eigenvalue clears the random-graph noise
/// level `SPECTRAL_NOISE_FACTOR * sigma * sqrt(n)`, `sigma^2 = d (1 - d)`.
pub fn spectral_witness_vectors(g: &Graph, count: usize) -> Result<Vec<Vec<f64>>> {
    let d = g.density();
    let noise = SPECTRAL_NOISE_FACTOR * (d * (1.0 - d)).sqrt() * (g.n() as f64).sqrt();
    Ok(centered_top_eigenpairs(g, count)?
        .into_iter()
        .filter(|(lambda, _)| lambda.abs() > noise)
        .map(|(_, v)| v)
        .collect())
}
