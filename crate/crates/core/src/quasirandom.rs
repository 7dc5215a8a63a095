//! `delta_H(p)`, the conjugate density, and the quasi-randomness property checkers.
//!
//! Every checker turns an asymptotic "+ o(n^k)" statement into an explicit,
//! normalized deviation: the largest discrepancy over the witnesses it examined.
//! No verdict thresholds live here; callers compare deviations against their
//! own tolerance.
//!
//! Edge counts are compared against `p|U|^2 / 2`, not `p|U|(|U|-1)/2`. The two
//! differ by `p|U|/2`, i.e. at most `p/(2n)` after normalizing by `n^2`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_interior, check_probability, Error, Result};
use crate::graph::{Graph, VertexSetTuple};
use crate::pattern::{count_induced_sigma, count_labeled, count_labeled_tuple, permutations, PatternGraph};
use crate::rng::substream_indexed;

/// Largest graph the exhaustive subset modes accept.
pub const EXHAUSTIVE_MAX_N: usize = 20;

/// Lower end of the conjugate bisection bracket (and its mirror `1 - BRACKET_EDGE`).
pub const BRACKET_EDGE: f64 = 1e-12;
const BISECTION_STEPS: usize = 200;

/// `p^m (1-p)^(C(h,2)-m)` without range checks.
pub(crate) fn delta_raw(pattern: &PatternGraph, p: f64) -> f64 {
    p.powi(pattern.m() as i32) * (1.0 - p).powi(pattern.non_edges() as i32)
}

/// `delta_H(p) = p^m (1-p)^(C(h,2)-m)`, the probability that a fixed placement of
/// `H` is induced in `G(n, p)`.
pub fn delta_h(pattern: &PatternGraph, p: f64) -> Result<f64> {
    check_interior(p)?;
    Ok(delta_raw(pattern, p))
}

/// `ln delta_H(x)`, with `one_minus_x` passed separately so values of `x` near 1 keep precision.
pub(crate) fn log_f(pattern: &PatternGraph, x: f64, one_minus_x: f64) -> f64 {
    let m = pattern.m() as f64;
    let k = pattern.non_edges() as f64;
    let a = if m == 0.0 { 0.0 } else { m * x.ln() };
    let b = if k == 0.0 { 0.0 } else { k * one_minus_x.ln() };
    a + b
}

/// A density and its conjugate with respect to a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPair {
    pub p: f64,
    pub p_bar: f64,
    /// `delta_H(p)`.
    pub delta: f64,
    pub edges: usize,
    pub pairs: usize,
}

impl DensityPair {
    pub fn is_degenerate(&self) -> bool {
        self.p == self.p_bar
    }

    /// Peak of `x^m (1-x)^(C(h,2)-m)`, at `m / C(h,2)`.
    pub fn peak(&self) -> f64 {
        self.edges as f64 / self.pairs as f64
    }
}

/// Conjugate of `p` with respect to `H`: the other root in `(0, 1)` of
/// `x^m (1-x)^(C(h,2)-m) = delta_H(p)`.
///
/// The function is unimodal with its peak at `x* = m / C(h,2)`, so the root is
/// bisected on the monotone branch opposite `p`. When `H` is complete or
/// edgeless, or `p` sits on the peak, the conjugate is `p` itself.
pub fn conjugate(pattern: &PatternGraph, p: f64, tol: f64) -> Result<DensityPair> {
    check_interior(p)?;
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let delta = delta_raw(pattern, p);
    let pair = |p_bar| DensityPair {
        p,
        p_bar,
        delta,
        edges: pattern.m(),
        pairs: pattern.total_pairs(),
    };
    if pattern.is_trivial() {
        return Ok(pair(p));
    }
    let peak = pattern.m() as f64 / pattern.total_pairs() as f64;
    if (p - peak).abs() <= BRACKET_EDGE {
        return Ok(pair(p));
    }
    let target = log_f(pattern, p, 1.0 - p);
    let p_bar = if p < peak {
        // high branch, parametrized by q = 1 - x, on which log f increases with q
        let q = bisect(BRACKET_EDGE, 1.0 - peak, |q| log_f(pattern, 1.0 - q, q) - target);
        1.0 - q
    } else {
        bisect(BRACKET_EDGE, peak, |x| log_f(pattern, x, 1.0 - x) - target)
    };
    let achieved = delta_raw(pattern, p_bar);
    if (achieved - delta).abs() > tol * delta {
        return Err(Error::Precondition(format!(
            "conjugate of {p} lies outside the solver bracket (residual {:e})",
            (achieved - delta).abs() / delta
        )));
    }
    Ok(pair(p_bar))
}

/// Root of an increasing function on `[lo, hi]`, clamped to the bracket.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    if f(lo) >= 0.0 {
        return lo;
    }
    if f(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() < f(lo).abs() {
        hi
    } else {
        lo
    }
}

/// How subsets (or tuples) are chosen by a checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Budget {
    /// Every admissible witness.
    Exhaustive,
    /// `samples` random witnesses drawn from per-sample streams of `seed`.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    P1,
    P2,
    P3,
    P4,
    P5,
    PH,
    PStarH,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Set(Vec<usize>),
    Tuple { sets: Vec<Vec<usize>>, sigma: Vec<usize> },
}

/// Largest normalized deviation found for one property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyDeviation {
    pub property: Property,
    pub deviation: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
    pub exhaustive: bool,
    /// Secondary quantities (eigenvalues, edge deviation, per-set-size normalization, ...).
    pub components: BTreeMap<String, f64>,
}

impl PropertyDeviation {
    fn new(property: Property, deviation: f64, witness: Option<Witness>, samples: usize, exhaustive: bool) -> Self {
        PropertyDeviation {
            property,
            deviation,
            witness,
            samples,
            exhaustive,
            components: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.components.insert(key.to_string(), value);
        self
    }
}

/// Order-independent maximum: larger value wins, then the smaller index.
fn best<T>(a: (f64, usize, T), b: (f64, usize, T)) -> (f64, usize, T) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

fn sampled_max<T: Send>(samples: usize, eval: impl Fn(usize) -> (f64, T) + Sync) -> Option<(f64, T)> {
    let (d, _, w) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let (d, w) = eval(i);
            (d, i, Some(w))
        })
        .reduce(|| (f64::NEG_INFINITY, usize::MAX, None), best);
    w.map(|w| (d, w))
}

fn check_exhaustive_n(g: &Graph) -> Result<()> {
    if g.n() > EXHAUSTIVE_MAX_N {
        return Err(Error::CapExceeded {
            what: format!("exhaustive subset scan on {} vertices", g.n()),
            limit: format!("n <= {EXHAUSTIVE_MAX_N}"),
        });
    }
    Ok(())
}

fn small_rows(g: &Graph) -> Vec<u32> {
    (0..g.n()).map(|v| g.row(v)[0] as u32).collect()
}

fn bits_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

fn within_small(rows: &[u32], mask: u32) -> u64 {
    bits_of(mask).iter().map(|&u| (rows[u] & mask).count_ones() as u64).sum::<u64>() / 2
}

/// All `k`-subsets of `0..n` as bitmasks, in increasing order.
fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u32> {
    let limit = 1u64 << n;
    let start = if k == 0 { 0u64 } else { (1u64 << k) - 1 };
    let mut next = Some(start).filter(|&s| s < limit || (k == 0));
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nx = (((r ^ cur) >> 2) / c) | r;
            (nx < limit).then_some(nx)
        };
        Some(cur as u32)
    })
}

fn random_subset(n: usize, size: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut s = index::sample(rng, n, size.min(n)).into_vec();
    s.sort_unstable();
    s
}

fn edge_dev(e: u64, p: f64, size: usize, n: usize) -> f64 {
    (e as f64 - 0.5 * p * (size * size) as f64).abs() / (n * n) as f64
}

fn p1_sizes(n: usize) -> [usize; 3] {
    [n / 4, n / 2, 3 * n / 4]
}

/// P1: `max |e(U) - p|U|^2/2| / n^2` over examined `U`.
pub fn check_p1(g: &Graph, p: f64, budget: Budget) -> Result<PropertyDeviation> {
    check_probability(p)?;
    let n = g.n();
    if n == 0 {
        return Ok(PropertyDeviation::new(Property::P1, 0.0, None, 0, true));
    }
    match budget {
        Budget::Exhaustive => {
            check_exhaustive_n(g)?;
            let rows = small_rows(g);
            // Gray-code walk over all 2^n subsets, updating e(U) one vertex at a time.
            let (mut mask, mut e, mut size) = (0u32, 0u64, 0usize);
            let (mut best_dev, mut best_mask) = (edge_dev(0, p, 0, n), 0u32);
            for i in 1u64..(1u64 << n) {
                let v = i.trailing_zeros() as usize;
                let bit = 1u32 << v;
                if mask & bit == 0 {
                    e += (rows[v] & mask).count_ones() as u64;
                    mask |= bit;
                    size += 1;
                } else {
                    mask &= !bit;
                    e -= (rows[v] & mask).count_ones() as u64;
                    size -= 1;
                }
                let d = edge_dev(e, p, size, n);
                if d > best_dev || (d == best_dev && mask < best_mask) {
                    best_dev = d;
                    best_mask = mask;
                }
            }
            Ok(PropertyDeviation::new(
                Property::P1,
                best_dev,
                Some(Witness::Set(bits_of(best_mask))),
                1 << n,
                true,
            ))
        }
        Budget::Sampled { samples, seed } => {
            let all: Vec<usize> = (0..n).collect();
            let full = edge_dev(g.edge_count(), p, n, n);
            let sizes = p1_sizes(n);
            let found = sampled_max(samples, |i| {
                let mut rng = substream_indexed(seed, "p1", i as u64);
                let size = sizes[rng.random_range(0..3)];
                let set = random_subset(n, size, &mut rng);
                let e = g.edge_count_within(&set).expect("sampled vertices are in range");
                (edge_dev(e, p, size, n), set)
            });
            let (dev, witness) = match found {
                Some((d, set)) if d > full => (d, set),
                _ => (full, all),
            };
            Ok(PropertyDeviation::new(Property::P1, dev, Some(Witness::Set(witness)), samples + 1, false))
        }
    }
}

/// P2: as P1, restricted to `|U| = floor(n/2)`.
pub fn check_p2(g: &Graph, p: f64, budget: Budget) -> Result<PropertyDeviation> {
    check_probability(p)?;
    let n = g.n();
    let size = n / 2;
    match budget {
        Budget::Exhaustive => {
            check_exhaustive_n(g)?;
            let rows = small_rows(g);
            let (mut best_dev, mut best_mask, mut count) = (f64::NEG_INFINITY, 0u32, 0usize);
            for mask in subsets_of_size(n, size) {
                count += 1;
                let d = edge_dev(within_small(&rows, mask), p, size, n.max(1));
                if d > best_dev {
                    best_dev = d;
                    best_mask = mask;
                }
            }
            Ok(PropertyDeviation::new(
                Property::P2,
                best_dev.max(0.0),
                Some(Witness::Set(bits_of(best_mask))),
                count,
                true,
            ))
        }
        Budget::Sampled { samples, seed } => {
            let found = sampled_max(samples.max(1), |i| {
                let mut rng = substream_indexed(seed, "p2", i as u64);
                let set = random_subset(n, size, &mut rng);
                let e = g.edge_count_within(&set).expect("sampled vertices are in range");
                (edge_dev(e, p, size, n.max(1)), set)
            });
            let (dev, set) = found.expect("at least one sample");
            Ok(PropertyDeviation::new(Property::P2, dev, Some(Witness::Set(set)), samples.max(1), false))
        }
    }
}

/// Adjacency eigenvalues sorted by absolute value (descending), ties by value (descending).
pub fn spectrum(g: &Graph, tol: f64) -> Result<Vec<f64>> {
    let n = g.n();
    let a = DMatrix::from_fn(n, n, |i, j| if i != j && g.has_edge(i, j) { 1.0 } else { 0.0 });
    let eig = SymmetricEigen::try_new(a, tol.max(f64::EPSILON), 10_000 * n.max(1))
        .ok_or(Error::EigenNonConvergence)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));
    Ok(vals)
}

/// P3: edge count plus the two largest-modulus adjacency eigenvalues.
///
/// Components: `edge_term = (e(G) - p n^2/2)/n^2`, `lambda1_term = (lambda1 - pn)/n`,
/// `lambda2_term = lambda2/n`; the deviation is the largest absolute term.
pub fn check_p3(g: &Graph, p: f64, tol: f64) -> Result<PropertyDeviation> {
    check_probability(p)?;
    let n = g.n();
    if n < 2 {
        return Err(Error::Precondition("spectral check needs n >= 2".into()));
    }
    let vals = spectrum(g, tol)?;
    let nf = n as f64;
    let edge_term = (g.edge_count() as f64 - 0.5 * p * nf * nf) / (nf * nf);
    let l1 = (vals[0] - p * nf) / nf;
    let l2 = vals[1] / nf;
    let dev = edge_term.abs().max(l1.abs()).max(l2.abs());
    Ok(PropertyDeviation::new(Property::P3, dev, None, 1, true)
        .with("lambda1", vals[0])
        .with("lambda2", vals[1])
        .with("edge_term", edge_term)
        .with("lambda1_term", l1)
        .with("lambda2_term", l2))
}

/// P4(t): labeled `C_t` count against `p^t n^t`, with the edge-count deviation as a component.
pub fn check_p4(g: &Graph, p: f64, t: usize) -> Result<PropertyDeviation> {
    check_probability(p)?;
    if t < 4 || !t.is_multiple_of(2) {
        return Err(Error::Parameter(format!("cycle length must be even and >= 4, got {t}")));
    }
    let n = g.n();
    let cycle = PatternGraph::from_graph(format!("cycle:{t}"), &Graph::cycle(t))?;
    let all: Vec<usize> = (0..n).collect();
    let count = count_labeled(g, &cycle, &all)?;
    let nt = (n as f64).powi(t as i32).max(1.0);
    let dev = (count as f64 - p.powi(t as i32) * nt).abs() / nt;
    Ok(PropertyDeviation::new(Property::P4, dev, None, 1, true)
        .with("cycle_count", count as f64)
        .with("edge_deviation", edge_dev(g.edge_count(), p, n, n.max(1))))
}

/// P5: `max |e(U, V \ U) - p alpha (1-alpha) n^2| / n^2` over `|U| = round(alpha n)`.
pub fn check_p5(g: &Graph, p: f64, alpha: f64, budget: Budget) -> Result<PropertyDeviation> {
    check_probability(p)?;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, 1/2), got {alpha}: at alpha = 1/2 the cut condition no longer forces quasi-randomness"
        )));
    }
    let n = g.n();
    let nf = n.max(1) as f64;
    let size = (alpha * n as f64).round() as usize;
    let target = p * alpha * (1.0 - alpha) * nf * nf;
    let cut = |set: &[usize]| -> f64 {
        let deg: u64 = set.iter().map(|&u| g.degree(u) as u64).sum();
        let inside = g.edge_count_within(set).expect("vertices in range");
        (deg - 2 * inside) as f64
    };
    match budget {
        Budget::Exhaustive => {
            check_exhaustive_n(g)?;
            let (mut best_dev, mut best_set, mut count) = (f64::NEG_INFINITY, Vec::new(), 0usize);
            for mask in subsets_of_size(n, size) {
                count += 1;
                let set = bits_of(mask);
                let d = (cut(&set) - target).abs() / (nf * nf);
                if d > best_dev {
                    best_dev = d;
                    best_set = set;
                }
            }
            Ok(PropertyDeviation::new(Property::P5, best_dev, Some(Witness::Set(best_set)), count, true))
        }
        Budget::Sampled { samples, seed } => {
            let (dev, set) = sampled_max(samples.max(1), |i| {
                let mut rng = substream_indexed(seed, "p5", i as u64);
                let set = random_subset(n, size, &mut rng);
                ((cut(&set) - target).abs() / (nf * nf), set)
            })
            .expect("at least one sample");
            Ok(PropertyDeviation::new(Property::P5, dev, Some(Witness::Set(set)), samples.max(1), false)
                .with("alpha", alpha))
        }
    }
}

/// Induced-tuple deviation of one tuple, maximized over all `h!` permutations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleDeviation {
    /// `|H*_sigma - delta s^h| / n^h`.
    pub per_n: f64,
    /// `|H*_sigma - delta s^h| / s^h`.
    pub per_set_size: f64,
    pub sigma: Vec<usize>,
    pub count: u128,
}

/// Deviation of `H*_sigma[U_1..U_h]` from `delta_H(p) s^h` for one tuple of equal-size sets.
pub fn pstar_tuple_deviation(
    g: &Graph,
    pattern: &PatternGraph,
    p: f64,
    tuple: &VertexSetTuple,
) -> Result<TupleDeviation> {
    check_probability(p)?;
    let s = tuple
        .common_size()
        .ok_or_else(|| Error::Precondition("tuple sets must have equal size".into()))?;
    let h = pattern.h() as i32;
    let expected = delta_raw(pattern, p) * (s as f64).powi(h);
    let nh = (g.n().max(1) as f64).powi(h);
    let sh = (s.max(1) as f64).powi(h);
    let mut out: Option<TupleDeviation> = None;
    for sigma in permutations(pattern.h()) {
        let count = count_induced_sigma(g, pattern, tuple, &sigma)?;
        let diff = (count as f64 - expected).abs();
        if out.as_ref().is_none_or(|o| diff / nh > o.per_n) {
            out = Some(TupleDeviation {
                per_n: diff / nh,
                per_set_size: diff / sh,
                sigma: sigma.targets().to_vec(),
                count,
            });
        }
    }
    Ok(out.expect("h! >= 1 permutations"))
}

fn tuple_sizes(n: usize, h: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = [n / (4 * h), n / (2 * h), n / h].into_iter().filter(|&s| s >= 1).collect();
    sizes.dedup();
    sizes
}

fn random_tuple(n: usize, h: usize, sizes: &[usize], rng: &mut impl Rng) -> VertexSetTuple {
    let s = sizes[rng.random_range(0..sizes.len())];
    let mut vs: Vec<usize> = (0..n).collect();
    vs.shuffle(rng);
    let sets = vs.chunks(s).take(h).map(|c| {
        let mut c = c.to_vec();
        c.sort_unstable();
        c
    });
    VertexSetTuple::new(sets.collect()).expect("chunks are disjoint and equal")
}

/// Largest number of ordered tuples the exhaustive tuple modes will enumerate.
pub const EXHAUSTIVE_TUPLE_LIMIT: u64 = 1 << 20;

/// All ordered tuples of `h` disjoint, non-empty, equal-size subsets of `0..n`.
fn all_tuples(n: usize, h: usize) -> Result<Vec<VertexSetTuple>> {
    let assignments = ((h + 1) as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if assignments > EXHAUSTIVE_TUPLE_LIMIT {
        return Err(Error::CapExceeded {
            what: format!("exhaustive tuple scan with n = {n}, h = {h}"),
            limit: format!("(h+1)^n <= {EXHAUSTIVE_TUPLE_LIMIT}"),
        });
    }
    let mut out = Vec::new();
    let mut label = vec![0usize; n];
    for code in 0..assignments {
        let mut c = code;
        for l in label.iter_mut() {
            *l = (c % (h as u64 + 1)) as usize;
            c /= h as u64 + 1;
        }
        let mut sets = vec![Vec::new(); h];
        for (v, &l) in label.iter().enumerate() {
            if l > 0 {
                sets[l - 1].push(v);
            }
        }
        let s = sets[0].len();
        if s > 0 && sets.iter().all(|x| x.len() == s) {
            out.push(VertexSetTuple::new(sets).expect("labels give disjoint sets"));
        }
    }
    Ok(out)
}

fn tuples_for(g: &Graph, h: usize, budget: Budget, tag: &str) -> Result<(Vec<VertexSetTuple>, bool)> {
    match budget {
        Budget::Exhaustive => Ok((all_tuples(g.n(), h)?, true)),
        Budget::Sampled { samples, seed } => {
            let sizes = tuple_sizes(g.n(), h);
            if sizes.is_empty() {
                return Err(Error::Precondition(format!(
                    "graph on {} vertices cannot hold {h} disjoint non-empty sets",
                    g.n()
                )));
            }
            let tuples = (0..samples.max(1))
                .map(|i| random_tuple(g.n(), h, &sizes, &mut substream_indexed(seed, tag, i as u64)))
                .collect();
            Ok((tuples, false))
        }
    }
}

/// P*_H: `max |H*_sigma[U_1..U_h] - delta_H(p) s^h| / n^h` over examined tuples and all sigma.
///
/// The `max_deviation_per_set_size` component reports the same maximum
/// normalized by `s^h` instead, which stays meaningful for small sets.
pub fn check_pstar_h(g: &Graph, pattern: &PatternGraph, p: f64, budget: Budget) -> Result<PropertyDeviation> {
    check_probability(p)?;
    let (tuples, exhaustive) = tuples_for(g, pattern.h(), budget, "pstar")?;
    let results: Vec<TupleDeviation> = tuples
        .par_iter()
        .map(|t| pstar_tuple_deviation(g, pattern, p, t))
        .collect::<Result<_>>()?;
    let (i, top) = results
        .iter()
        .enumerate()
        .fold(None::<(usize, &TupleDeviation)>, |acc, (i, r)| match acc {
            Some((_, a)) if a.per_n >= r.per_n => acc,
            _ => Some((i, r)),
        })
        .expect("at least one tuple");
    let per_s = results.iter().map(|r| r.per_set_size).fold(0.0, f64::max);
    Ok(PropertyDeviation::new(
        Property::PStarH,
        top.per_n,
        Some(Witness::Tuple {
            sets: tuples[i].sets().to_vec(),
            sigma: top.sigma.clone(),
        }),
        tuples.len(),
        exhaustive,
    )
    .with("max_deviation_per_set_size", per_s))
}

/// `H[U_1..U_h]` summed over all `h!` orderings of the sets, i.e. placements of
/// `H` with one vertex in each set in any order.
pub fn unordered_tuple_copies(g: &Graph, pattern: &PatternGraph, tuple: &VertexSetTuple) -> Result<u128> {
    let mut total = 0;
    for sigma in permutations(pattern.h()) {
        let sets = sigma.targets().iter().map(|&t| tuple.set(t).to_vec()).collect();
        total += count_labeled_tuple(g, pattern, &VertexSetTuple::disjoint(sets)?)?;
    }
    Ok(total)
}

/// P_H: `max |H[U_1..U_h] - p^m h! s^h| / n^h`, where the tuple statistic counts
/// copies over all `h!` orderings of the sets.
pub fn check_p_h(g: &Graph, pattern: &PatternGraph, p: f64, budget: Budget) -> Result<PropertyDeviation> {
    check_probability(p)?;
    let h = pattern.h();
    let (tuples, exhaustive) = tuples_for(g, h, budget, "ph")?;
    let fact: f64 = (1..=h).map(|k| k as f64).product();
    let nh = (g.n().max(1) as f64).powi(h as i32);
    let devs: Vec<(f64, f64)> = tuples
        .par_iter()
        .map(|t| {
            let s = t.common_size().expect("equal-size tuple") as f64;
            let expected = p.powi(pattern.m() as i32) * fact * s.powi(h as i32);
            let c = unordered_tuple_copies(g, pattern, t)? as f64;
            Ok(((c - expected).abs() / nh, (c - expected).abs() / s.powi(h as i32)))
        })
        .collect::<Result<_>>()?;
    let (i, dev) = devs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, d)| if d.0 > acc.1 { (i, d.0) } else { acc });
    let per_s = devs.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(PropertyDeviation::new(
        Property::PH,
        dev,
        Some(Witness::Tuple {
            sets: tuples[i].sets().to_vec(),
            sigma: (0..h).collect(),
        }),
        tuples.len(),
        exhaustive,
    )
    .with("max_deviation_per_set_size", per_s))
}

/// Limiting induced density of `H` on a uniformly random vertex tuple of the
/// two-block model: block sizes `alpha`, `1 - alpha`, density `p1` inside blocks
/// and `p2` across.
pub fn two_block_induced_density(pattern: &PatternGraph, alpha: f64, p1: f64, p2: f64) -> f64 {
    let h = pattern.h();
    (0u32..1 << h)
        .map(|blocks| {
            let mut prob = 1.0;
            for v in 0..h {
                prob *= if blocks >> v & 1 == 0 { alpha } else { 1.0 - alpha };
            }
            for j in 1..h {
                for i in 0..j {
                    let same = (blocks >> i & 1) == (blocks >> j & 1);
                    let w = if same { p1 } else { p2 };
                    prob *= if pattern.is_edge(i, j) { w } else { 1.0 - w };
                }
            }
            prob
        })
        .sum()
}

/// Cross densities `p2 != p1` for which the two-block model has the same limiting
/// induced density of `H` as `G(n, p)`. Found by a grid scan plus bisection.
pub fn two_block_matching_cross_densities(pattern: &PatternGraph, p: f64, alpha: f64, p1: f64) -> Result<Vec<f64>> {
    check_interior(p)?;
    check_probability(p1)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let target = delta_raw(pattern, p);
    let f = |x: f64| two_block_induced_density(pattern, alpha, p1, x) - target;
    const GRID: usize = 2000;
    let mut roots = Vec::new();
    let mut prev = (0.0, f(0.0));
    for k in 1..=GRID {
        let x = k as f64 / GRID as f64;
        let fx = f(x);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1 * fx < 0.0 {
            let (mut lo, mut hi) = (prev.0, x);
            let rising = fx > 0.0;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, fx);
    }
    if prev.1 == 0.0 {
        roots.push(prev.0);
    }
    roots.retain(|&r| (r - p1).abs() > 1e-9);
    Ok(roots)
}

/// Clique fraction `alpha` for which `K_{alpha n}` plus a balanced complete
/// bipartite graph on the rest has limiting edge density `p` (needs `p >= 1/3`).
pub fn clique_plus_bipartite_alpha(p: f64) -> Result<f64> {
    check_probability(p)?;
    // alpha^2 + (1 - alpha)^2 / 2 = p
    let disc = 6.0 * p - 2.0;
    if disc < 0.0 {
        return Err(Error::Parameter(format!("edge density {p} is below the construction's minimum 1/3")));
    }
    Ok(((1.0 + disc.sqrt()) / 3.0).min(1.0))
}
