//! Plain-text graph and weighted-graph files.
//!
//! Graph file: first line `n`, then one `u v` line per edge with `u < v < n`.
//! Weighted file: first line `r`, then one `i j w` line per pair with `i < j < r`
//! and `w` in `[0, 1]`; every pair must appear exactly once.
//! Blank lines are ignored; line numbers in errors are 1-based.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{choose2, pair_index, Graph, WeightedGraph};

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_usize(line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("{what} `{tok}` is not a non-negative integer")))
}

fn header(line: usize, l: &str) -> Result<usize> {
    let mut toks = l.split_whitespace();
    let n = parse_usize(line, toks.next(), "vertex count")?;
    if toks.next().is_some() {
        return Err(parse_err(line, "header must contain only the vertex count"));
    }
    Ok(n)
}

fn ordered_pair(line: usize, u: usize, v: usize, n: usize) -> Result<()> {
    if u == v {
        return Err(parse_err(line, format!("self-loop at vertex {u}")));
    }
    if u > v {
        return Err(parse_err(line, format!("pair ({u}, {v}) must be written with the smaller endpoint first")));
    }
    if v >= n {
        return Err(parse_err(line, format!("vertex {v} out of range for n = {n}")));
    }
    Ok(())
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut it = lines(text);
    let (hl, hdr) = it.next().ok_or_else(|| parse_err(1, "empty graph file"))?;
    let n = header(hl, hdr)?;
    let mut g = Graph::empty(n);
    for (line, l) in it {
        let mut toks = l.split_whitespace();
        let u = parse_usize(line, toks.next(), "first endpoint")?;
        let v = parse_usize(line, toks.next(), "second endpoint")?;
        if toks.next().is_some() {
            return Err(parse_err(line, "expected exactly two endpoints"));
        }
        ordered_pair(line, u, v, n)?;
        if g.has_edge(u, v) {
            return Err(parse_err(line, format!("duplicate edge ({u}, {v})")));
        }
        g.set_edge(u, v);
    }
    Ok(g)
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("{}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_weighted(text: &str) -> Result<WeightedGraph> {
    let mut it = lines(text);
    let (hl, hdr) = it.next().ok_or_else(|| parse_err(1, "empty weights file"))?;
    let r = header(hl, hdr)?;
    if r < 2 {
        return Err(parse_err(hl, format!("weighted graph needs r >= 2, got {r}")));
    }
    let mut weights: Vec<Option<f64>> = vec![None; choose2(r)];
    let mut last_line = hl;
    for (line, l) in it {
        last_line = line;
        let mut toks = l.split_whitespace();
        let i = parse_usize(line, toks.next(), "first endpoint")?;
        let j = parse_usize(line, toks.next(), "second endpoint")?;
        let wt = toks.next().ok_or_else(|| parse_err(line, "missing weight"))?;
        if toks.next().is_some() {
            return Err(parse_err(line, "expected `i j w`"));
        }
        ordered_pair(line, i, j, r)?;
        let w: f64 = wt
            .parse()
            .map_err(|_| parse_err(line, format!("weight `{wt}` is not a decimal")))?;
        if !(0.0..=1.0).contains(&w) {
            return Err(parse_err(line, format!("weight {w} outside [0, 1]")));
        }
        let slot = &mut weights[pair_index(i, j)];
        if slot.is_some() {
            return Err(parse_err(line, format!("duplicate pair ({i}, {j})")));
        }
        *slot = Some(w);
    }
    let missing = weights.iter().filter(|w| w.is_none()).count();
    if missing > 0 {
        return Err(parse_err(last_line, format!("{missing} of {} pairs have no weight", weights.len())));
    }
    WeightedGraph::new(r, weights.into_iter().map(Option::unwrap).collect())
}

pub fn write_weighted(w: &WeightedGraph) -> String {
    let mut out = format!("{}\n", w.r());
    let mut pairs: Vec<_> = w.pairs().collect();
    pairs.sort_by_key(|&(i, j, _)| (i, j));
    for (i, j, x) in pairs {
        let _ = writeln!(out, "{i} {j} {x}");
    }
    out
}
