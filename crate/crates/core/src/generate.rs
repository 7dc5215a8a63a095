//! Seeded random graphs and the standard counterexample constructions.
//!
//! All randomness comes from [`crate::rng`] substreams keyed by `(seed, tag)`,
//! so a generator called twice with the same arguments returns the same graph.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{check_interior, check_probability, Error, Result};
use crate::graph::{Graph, WeightedGraph};
use crate::pattern::PatternGraph;
use crate::quasirandom::{conjugate, DensityPair};
use crate::rng::{substream, Stream};

/// Solver tolerance used when a generator needs the conjugate density.
pub const CONJUGATE_TOL: f64 = 1e-12;

fn coin(rng: &mut Stream, p: f64) -> bool {
    // strict comparison keeps p = 0 and p = 1 exact
    rng.random::<f64>() < p
}

/// `G(n, p)`: each pair `u < v` is an edge independently with probability `p`,
/// drawn in colex pair order from the `"gnp"` substream of `seed`.
pub fn generate_gnp(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    let mut rng = substream(seed, "gnp");
    let mut g = Graph::empty(n);
    for v in 1..n {
        for u in 0..v {
            if coin(&mut rng, p) {
                g.set_edge(u, v);
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    BalancedBipartite,
    CliquePlusBipartite,
    TwoBlock,
    HubWeighted,
}

impl CounterexampleKind {
    pub const ALL: [CounterexampleKind; 4] = [
        CounterexampleKind::BalancedBipartite,
        CounterexampleKind::CliquePlusBipartite,
        CounterexampleKind::TwoBlock,
        CounterexampleKind::HubWeighted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CounterexampleKind::BalancedBipartite => "balanced_bipartite",
            CounterexampleKind::CliquePlusBipartite => "clique_plus_bipartite",
            CounterexampleKind::TwoBlock => "two_block",
            CounterexampleKind::HubWeighted => "hub_weighted",
        }
    }
}

impl fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CounterexampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "counterexample kind",
                name: s.to_string(),
            })
    }
}

/// Parameters for [`generate_counterexample`]; each kind reads only the fields it needs.
#[derive(Debug, Clone, Default)]
pub struct CounterexampleParams {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub r: Option<usize>,
    pub pattern: Option<PatternGraph>,
    pub p: Option<f64>,
}

fn need<T: Clone>(v: &Option<T>, name: &str, kind: CounterexampleKind) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Parameter(format!("{kind} needs parameter `{name}`")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Graph(Graph),
    /// A weighted complete graph; `degenerate` is set when `p = p_bar`, in which
    /// case the hub is indistinguishable from the rest.
    Weighted {
        graph: WeightedGraph,
        density: DensityPair,
        degenerate: bool,
    },
}

/// `K_{ceil(n/2), floor(n/2)}` with the first `ceil(n/2)` vertices on one side.
pub fn balanced_bipartite(n: usize) -> Graph {
    Graph::complete_bipartite(n.div_ceil(2), n / 2)
}

/// Disjoint union of a clique on the first `round(alpha n)` vertices and a balanced
/// complete bipartite graph on the remaining ones.
pub fn clique_plus_bipartite(n: usize, alpha: f64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let c = ((alpha * n as f64).round() as usize).min(n);
    let rest = n - c;
    let side = rest.div_ceil(2);
    Ok(Graph::from_fn(n, |u, v| {
        if v < c {
            true
        } else if u < c {
            false
        } else {
            (u - c < side) != (v - c < side)
        }
    }))
}

/// Vertices `0..round(alpha n)` form block one; pairs inside a block are edges with
/// probability `p1`, pairs across with probability `p2`.
pub fn two_block(n: usize, alpha: f64, p1: f64, p2: f64, seed: u64) -> Result<Graph> {
    check_probability(p1)?;
    check_probability(p2)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let first = ((alpha * n as f64).round() as usize).min(n);
    let mut rng = substream(seed, "two_block");
    let mut g = Graph::empty(n);
    for v in 1..n {
        for u in 0..v {
            let p = if (u < first) == (v < first) { p1 } else { p2 };
            if coin(&mut rng, p) {
                g.set_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Weight `p` on every pair avoiding vertex `r - 1`, and the conjugate `p_bar`
/// on the `r - 1` pairs touching it.
pub fn hub_weighted(r: usize, pattern: &PatternGraph, p: f64) -> Result<(WeightedGraph, DensityPair)> {
    check_interior(p)?;
    if r < 2 {
        return Err(Error::Parameter(format!("hub graph needs r >= 2, got {r}")));
    }
    let density = conjugate(pattern, p, CONJUGATE_TOL)?;
    let w = WeightedGraph::from_fn(r, |_, j| if j == r - 1 { density.p_bar } else { p })?;
    Ok((w, density))
}

pub fn generate_counterexample(
    kind: CounterexampleKind,
    params: &CounterexampleParams,
    seed: u64,
) -> Result<Generated> {
    Ok(match kind {
        CounterexampleKind::BalancedBipartite => Generated::Graph(balanced_bipartite(need(&params.n, "n", kind)?)),
        CounterexampleKind::CliquePlusBipartite => Generated::Graph(clique_plus_bipartite(
            need(&params.n, "n", kind)?,
            need(&params.alpha, "alpha", kind)?,
        )?),
        CounterexampleKind::TwoBlock => Generated::Graph(two_block(
            need(&params.n, "n", kind)?,
            need(&params.alpha, "alpha", kind)?,
            need(&params.p1, "p1", kind)?,
            need(&params.p2, "p2", kind)?,
            seed,
        )?),
        CounterexampleKind::HubWeighted => {
            let pattern = need(&params.pattern, "pattern", kind)?;
            let (graph, density) = hub_weighted(need(&params.r, "r", kind)?, &pattern, need(&params.p, "p", kind)?)?;
            Generated::Weighted {
                graph,
                degenerate: density.is_degenerate(),
                density,
            }
        }
    })
}
