use std::path::Path;

use quasirand::analyze::{analyze, AnalyzeConfig};
use quasirand::generate::{generate_counterexample, generate_gnp, CounterexampleKind, CounterexampleParams, Generated};
use quasirand::io::{parse_graph, parse_weighted, write_graph, write_weighted};
use quasirand::lemmas::{
    balanced_coloring, canonical_form, classify_pairwise_regular_up_to, counting_lemma_experiment, find_bichromatic_kr,
    kr_edge_coverage,
};
use quasirand::pattern::{
    count_induced, count_induced_phi, count_induced_sigma, count_labeled, count_labeled_tuple, InjectiveMap,
};
use quasirand::quasirandom::{
    check_p1, check_p2, check_p3, check_p4, check_p5, check_p_h, check_pstar_h, two_block_matching_cross_densities, Budget,
};
use quasirand::reconstruct::{default_delta_tol, reconstruct};
use quasirand::{conjugate, Graph, PatternGraph, VertexSetTuple, WeightedGraph};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{emit, envelope, stringify_reals, to_value, Clock};
use crate::{CliError, Outcome};

const CONJUGATE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = 1e-10;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    parse_graph(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_weighted(path: &Path) -> Result<WeightedGraph, CliError> {
    parse_weighted(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// A builtin name, or a path to a graph file.
pub fn load_pattern(spec: &str) -> Result<PatternGraph, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        let g = load_graph(path)?;
        return Ok(PatternGraph::from_graph(spec, &g)?);
    }
    Ok(PatternGraph::builtin(spec)?)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Input(format!("{what}: `{t}` is not a non-negative integer"))))
        .collect()
}

fn parse_sets(s: &str) -> Result<VertexSetTuple, CliError> {
    let sets = s.split(';').map(|part| parse_list(part, "--sets")).collect::<Result<_, _>>()?;
    Ok(VertexSetTuple::new(sets)?)
}

fn graph_summary(path: &Path, g: &Graph) -> Value {
    json!({"path": path.display().to_string(), "n": g.n(), "edges": g.edge_count(), "density": g.density()})
}

fn pattern_summary(h: &PatternGraph) -> Value {
    json!({"name": h.name(), "h": h.h(), "m": h.m(), "edges": h.edges()})
}

fn budget(cli: &Cli, samples: usize, exhaustive: bool) -> Budget {
    if exhaustive {
        Budget::Exhaustive
    } else {
        Budget::Sampled { samples, seed: cli.seed }
    }
}

fn verdict_name<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    Ok(to_value(v)?.as_str().unwrap_or_default().to_string())
}

pub fn run(cli: &Cli, clock: &Clock) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Count(a) => count(cli, clock, a),
        Command::Props(a) => props(cli, clock, a),
        Command::Conjugate(a) => cmd_conjugate(cli, clock, a),
        Command::Reconstruct(a) => cmd_reconstruct(cli, clock, a),
        Command::Gen(a) => gen(cli, a),
        Command::Lemmas(a) => lemmas(cli, clock, a),
        Command::Analyze(a) => cmd_analyze(cli, clock, a),
    }
}

fn count(cli: &Cli, clock: &Clock, a: &CountArgs) -> Result<Outcome, CliError> {
    let h = load_pattern(&a.pattern)?;
    let g = load_graph(&a.graph)?;
    let sets = || {
        a.sets
            .as_deref()
            .ok_or_else(|| CliError::Input(format!("--mode {:?} needs --sets", a.mode).to_lowercase()))
            .and_then(parse_sets)
    };
    let all: Vec<usize> = (0..g.n()).collect();
    let n = match a.mode {
        CountMode::Labeled => count_labeled(&g, &h, &all)?,
        CountMode::Induced => count_induced(&g, &h, &all)?,
        CountMode::Tuple => count_labeled_tuple(&g, &h, &sets()?)?,
        CountMode::Sigma => {
            let sigma = a.sigma.as_deref().ok_or_else(|| CliError::Input("--mode sigma needs --sigma".into()))?;
            count_induced_sigma(&g, &h, &sets()?, &InjectiveMap::permutation(parse_list(sigma, "--sigma")?)?)?
        }
        CountMode::Phi => {
            let tuple = sets()?;
            let phi = a.phi.as_deref().ok_or_else(|| CliError::Input("--mode phi needs --phi".into()))?;
            count_induced_phi(&g, &h, &tuple, &InjectiveMap::new(parse_list(phi, "--phi")?, tuple.len())?)?
        }
    };
    if !a.json {
        println!("{n}");
        return Ok(Outcome::Success);
    }
    let count = u64::try_from(n).map(Value::from).unwrap_or_else(|_| Value::String(n.to_string()));
    let report = envelope(
        cli,
        clock,
        json!({"graph": graph_summary(&a.graph, &g), "pattern": pattern_summary(&h)}),
        json!({"mode": a.mode, "count": count}),
    )?;
    emit(cli, &report)?;
    Ok(Outcome::Success)
}

fn props(cli: &Cli, clock: &Clock, a: &PropsArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let b = budget(cli, a.samples, a.exhaustive);
    let mut results = vec![
        check_p1(&g, a.p, b)?,
        check_p2(&g, a.p, b)?,
        check_p3(&g, a.p, EIGEN_TOL)?,
        check_p4(&g, a.p, a.t)?,
        check_p5(&g, a.p, a.alpha, b)?,
    ];
    let mut input = json!({"graph": graph_summary(&a.graph, &g), "p": a.p});
    if let Some(spec) = &a.pattern {
        let h = load_pattern(spec)?;
        results.push(check_p_h(&g, &h, a.p, b)?);
        results.push(check_pstar_h(&g, &h, a.p, b)?);
        input["pattern"] = pattern_summary(&h);
    }
    let report = envelope(cli, clock, input, json!({"budget": b, "properties": to_value(&results)?}))?;
    emit(cli, &report)?;
    Ok(Outcome::Success)
}

fn cmd_conjugate(cli: &Cli, clock: &Clock, a: &ConjugateArgs) -> Result<Outcome, CliError> {
    let h = load_pattern(&a.pattern)?;
    let pair = conjugate(&h, a.p, CONJUGATE_TOL)?;
    if !a.json {
        let Value::Object(fields) = stringify_reals(to_value(&pair)?) else {
            unreachable!("density pair serializes to an object")
        };
        for (k, v) in fields {
            println!("{k} {}", v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()));
        }
        println!("degenerate {}", pair.is_degenerate());
        return Ok(Outcome::Success);
    }
    let mut results = to_value(&pair)?;
    results["degenerate"] = json!(pair.is_degenerate());
    let report = envelope(cli, clock, json!({"pattern": pattern_summary(&h), "p": a.p}), results)?;
    emit(cli, &report)?;
    Ok(Outcome::Success)
}

fn cmd_reconstruct(cli: &Cli, clock: &Clock, a: &ReconstructArgs) -> Result<Outcome, CliError> {
    let h = load_pattern(&a.pattern)?;
    let w = load_weighted(&a.weights)?;
    let delta_tol = a.delta_tol.unwrap_or_else(|| default_delta_tol(&h, a.p));
    let class = reconstruct(&w, &h, a.p, a.eps, delta_tol)?;
    let verdict = verdict_name(&class.verdict)?;
    let report = envelope(
        cli,
        clock,
        json!({"weights": a.weights.display().to_string(), "r": w.r(), "pattern": pattern_summary(&h), "p": a.p, "eps": a.eps, "delta_tol": delta_tol}),
        to_value(&class)?,
    )?;
    emit(cli, &report)?;
    Ok(match &a.expect {
        Some(e) if !(e == &verdict || (e == "HUB" && verdict.starts_with("HUB_"))) => {
            eprintln!("expected {e}, got {verdict}");
            Outcome::Mismatch
        }
        _ => Outcome::Success,
    })
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<Outcome, CliError> {
    let text = if a.kind == "gnp" {
        let n = a.n.ok_or_else(|| CliError::Input("gnp needs --n".into()))?;
        let p = a.p.ok_or_else(|| CliError::Input("gnp needs --p".into()))?;
        write_graph(&generate_gnp(n, p, cli.seed)?)
    } else {
        let kind: CounterexampleKind = a.kind.parse()?;
        let pattern = a.pattern.as_deref().map(load_pattern).transpose()?;
        let mut p2 = a.p2;
        if kind == CounterexampleKind::TwoBlock && p2.is_none() {
            if let (Some(h), Some(p), Some(alpha), Some(p1)) = (&pattern, a.p, a.alpha, a.p1) {
                p2 = two_block_matching_cross_densities(h, p, alpha, p1)?.first().copied();
                if p2.is_none() {
                    return Err(CliError::Input("no cross density matches delta_H(p); pass --p2".into()));
                }
            }
        }
        let params = CounterexampleParams {
            n: a.n,
            alpha: a.alpha,
            p1: a.p1,
            p2,
            r: a.r,
            pattern,
            p: a.p,
        };
        match generate_counterexample(kind, &params, cli.seed)? {
            Generated::Graph(g) => write_graph(&g),
            Generated::Weighted { graph, .. } => write_weighted(&graph),
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(Outcome::Success)
}

struct SuiteRow {
    suite: &'static str,
    pass: bool,
    detail: String,
    data: Value,
}

fn lemmas(cli: &Cli, clock: &Clock, a: &LemmasArgs) -> Result<Outcome, CliError> {
    let wants = |s: Suite| a.suite == Suite::All || a.suite == s;
    let mut rows = Vec::new();
    if wants(Suite::Classify) {
        let c = classify_pairwise_regular_up_to(a.n_max)?;
        let forms = |list: Vec<&quasirand::lemmas::ClassifiedGraph>| {
            let mut v: Vec<(usize, u32)> = list.into_iter().map(|g| g.canonical_form()).collect();
            v.sort_unstable();
            v
        };
        let known = |g: Graph| -> Result<Vec<(usize, u32)>, CliError> {
            let mut v = vec![canonical_form(&g)?, canonical_form(&g.complement())?];
            v.sort_unstable();
            Ok(v)
        };
        let pairwise = forms(c.nontrivial_pairwise());
        let outer = forms(c.nontrivial_outer());
        let pass = a.n_max < 4 || (pairwise == known(Graph::star(2))? && outer == known(Graph::star(3))?);
        rows.push(SuiteRow {
            suite: "classify",
            pass,
            detail: format!(
                "n <= {}: {} non-trivial pairwise-regular, {} non-trivial outer-regular classes",
                a.n_max,
                pairwise.len(),
                outer.len()
            ),
            data: to_value(&c)?,
        });
    }
    if wants(Suite::Coverage) {
        let g = match &a.graph {
            Some(p) => load_graph(p)?,
            None => generate_gnp(40, 0.5, cli.seed)?,
        };
        let r = a.r.unwrap_or(3);
        let cov = kr_edge_coverage(&g, r)?;
        let mut seen = std::collections::BTreeSet::new();
        let valid = cov.packing.iter().all(|k| {
            k.len() == r
                && k.iter()
                    .enumerate()
                    .all(|(i, &x)| k[i + 1..].iter().all(|&y| g.has_edge(x, y) && seen.insert((x, y))))
        });
        let pass = valid && cov.covered <= cov.edges && cov.packing.len() * (r * (r - 1) / 2) <= cov.covered;
        rows.push(SuiteRow {
            suite: "coverage",
            pass,
            detail: format!(
                "K_{r}: {} of {} edges covered, {} edge-disjoint copies packed",
                cov.covered,
                cov.edges,
                cov.packing.len()
            ),
            data: to_value(&cov)?,
        });
    }
    if wants(Suite::Bichromatic) {
        let r = a.r.unwrap_or(5);
        let coloring = balanced_coloring(Graph::complete(20), cli.seed);
        let s = find_bichromatic_kr(&coloring, r, a.trials, cli.seed)?;
        rows.push(SuiteRow {
            suite: "bichromatic",
            pass: s.found.is_some(),
            detail: match &s.found {
                Some(set) => format!("K_{r} {set:?} after {} trials", s.trials_used),
                None => format!("no bichromatic K_{r} in {} trials", s.trials),
            },
            data: to_value(&s)?,
        });
    }
    if wants(Suite::Counting) {
        let h = load_pattern(&a.pattern)?;
        let w = WeightedGraph::uniform(h.h(), a.p)?;
        let rep = counting_lemma_experiment(&w, &h, a.part_size, cli.seed)?;
        rows.push(SuiteRow {
            suite: "counting",
            pass: rep.max_deviation <= a.eps,
            detail: format!(
                "max |H*_phi / s^h - W(phi)| = {} over {} maps (limit {})",
                quasirand::report::sig12(rep.max_deviation),
                rep.phis_examined,
                a.eps
            ),
            data: to_value(&rep)?,
        });
    }
    println!("{:<12} {:<6} detail", "suite", "result");
    for row in &rows {
        println!("{:<12} {:<6} {}", row.suite, if row.pass { "PASS" } else { "FAIL" }, row.detail);
    }
    if cli.out.is_some() {
        let results: Vec<Value> = rows
            .iter()
            .map(|r| json!({"suite": r.suite, "pass": r.pass, "detail": r.detail, "data": r.data}))
            .collect();
        emit(cli, &envelope(cli, clock, json!({}), Value::Array(results))?)?;
    }
    Ok(if rows.iter().all(|r| r.pass) { Outcome::Success } else { Outcome::Mismatch })
}

fn cmd_analyze(cli: &Cli, clock: &Clock, a: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let g = load_graph(&a.graph)?;
    let h = load_pattern(&a.pattern)?;
    let cfg = AnalyzeConfig {
        k: a.k,
        r: a.r,
        eps: a.eps,
        gamma: a.gamma,
        delta_tol: a.delta_tol,
        p1_threshold: a.p1_threshold,
        budget: Budget::Sampled { samples: a.samples, seed: cli.seed },
        seed: cli.seed,
        ..AnalyzeConfig::default()
    };
    let report = analyze(&g, &h, a.p, &cfg)?;
    let verdict = verdict_name(&report.verdict)?;
    let out = envelope(
        cli,
        clock,
        json!({"graph": graph_summary(&a.graph, &g), "pattern": pattern_summary(&h), "p": a.p}),
        to_value(&report)?,
    )?;
    emit(cli, &out)?;
    Ok(match &a.expect {
        Some(e) if e != &verdict => {
            eprintln!("expected {e}, got {verdict}");
            Outcome::Mismatch
        }
        _ => Outcome::Success,
    })
}
