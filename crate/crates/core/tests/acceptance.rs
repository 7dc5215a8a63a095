//! Acceptance criteria AC1-AC10. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use quasirand::analyze::{analyze, AnalyzeConfig, AnalyzeVerdict};
use quasirand::generate::{generate_gnp, hub_weighted, two_block, CONJUGATE_TOL};
use quasirand::inclusion::{binomial, exact_rank, InclusionMatrix};
use quasirand::lemmas::{canonical_form, classify_pairwise_regular_up_to, counting_lemma_experiment};
use quasirand::pattern::{
    count_induced, count_induced_phi, count_induced_sigma, count_labeled, count_labeled_tuple, injective_maps,
    permutations,
};
use quasirand::quasirandom::{check_p3, delta_h, two_block_matching_cross_densities, Budget};
use quasirand::reconstruct::{
    color_balance, default_delta_tol, evaluate_all_phi, gcd_dichotomy_search, reconstruct, EdgeLabel, Verdict,
};
use quasirand::rng::substream_indexed;
use quasirand::{conjugate, Graph, PatternGraph, VertexSetTuple, WeightedGraph};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

/// Name, check, time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pattern(name: &str) -> PatternGraph {
    PatternGraph::builtin(name).unwrap()
}

fn ac1_inclusion_rank() -> Outcome {
    let mut checked = 0;
    for h in 3..=5 {
        for r in h + 2..=9 {
            let rank = exact_rank(&InclusionMatrix::new(r, h).map_err(|e| e.to_string())?);
            ensure(rank == binomial(r, 2), || format!("rank A({r},{h}) = {rank}, expected {}", binomial(r, 2)))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} matrices have full column rank C(r,2)"))
}

fn ac2_conjugate() -> Outcome {
    let (mut worst_rel, mut worst_back) = (0.0f64, 0.0f64);
    for name in ["path3", "cycle4", "star:3", "cycle:5"] {
        let h = pattern(name);
        for i in 1..=100 {
            let p = i as f64 / 101.0;
            let pair = conjugate(&h, p, CONJUGATE_TOL).map_err(|e| format!("{name} p={p}: {e}"))?;
            let d = delta_h(&h, p).unwrap();
            let rel = (delta_h(&h, pair.p_bar).unwrap() - d).abs() / d;
            ensure(rel <= 1e-10, || format!("{name} p={p}: relative delta mismatch {rel:e}"))?;
            let back = (conjugate(&h, pair.p_bar, CONJUGATE_TOL).unwrap().p_bar - p).abs();
            ensure(back <= 1e-8, || format!("{name} p={p}: double conjugate off by {back:e}"))?;
            worst_rel = worst_rel.max(rel);
            worst_back = worst_back.max(back);
        }
        let peak = h.m() as f64 / h.total_pairs() as f64;
        let at_peak = conjugate(&h, peak, CONJUGATE_TOL).unwrap();
        ensure(at_peak.p_bar == peak, || format!("{name}: conjugate at the peak moved to {}", at_peak.p_bar))?;
    }
    for name in ["clique:4", "empty:4", "clique:3"] {
        for p in [0.1, 0.37, 0.5, 0.9] {
            let pair = conjugate(&pattern(name), p, CONJUGATE_TOL).unwrap();
            ensure(pair.p_bar == p, || format!("{name} p={p}: degenerate conjugate {}", pair.p_bar))?;
        }
    }
    Ok(format!("max relative delta error {worst_rel:.2e}, max double-conjugate error {worst_back:.2e}"))
}

fn ac3_hub_round_trip() -> Outcome {
    let c4 = pattern("cycle4");
    let mut worst = 0.0f64;
    for p in [0.2, 0.3, 0.45] {
        let (w, _) = hub_weighted(6, &c4, p).unwrap();
        let eval = evaluate_all_phi(&w, &c4, p).unwrap();
        ensure(eval.max_deviation <= 1e-12, || format!("p={p}: max |W(phi) - delta| = {:e}", eval.max_deviation))?;
        worst = worst.max(eval.max_deviation);
        let class = reconstruct(&w, &c4, p, 0.01, default_delta_tol(&c4, p)).unwrap();
        let pbar_pairs: Vec<(usize, usize)> = w
            .pairs()
            .filter(|&(i, j, _)| class.label(i, j) == EdgeLabel::AtPbar)
            .map(|(i, j, _)| (i, j))
            .collect();
        ensure(pbar_pairs.len() == 5, || format!("p={p}: {} pairs at p_bar", pbar_pairs.len()))?;
        let shared: Vec<usize> = (0..6).filter(|&v| pbar_pairs.iter().all(|&(i, j)| i == v || j == v)).collect();
        ensure(shared.len() == 1, || format!("p={p}: p_bar pairs {pbar_pairs:?} share no single vertex"))?;
        ensure(class.verdict == Verdict::HubPbar && class.hub == Some(shared[0]), || {
            format!("p={p}: verdict {:?}, hub {:?}", class.verdict, class.hub)
        })?;
    }
    Ok(format!("max |W(phi) - delta| = {worst:.1e}; 5 p_bar pairs at one vertex for each p"))
}

fn ac4_gcd_dichotomy() -> Outcome {
    let p3 = gcd_dichotomy_search(&pattern("path3"), 5, 0.5, 1e-3).unwrap();
    ensure(p3.min_max_deviation >= 1e-3, || format!("path3: non-uniform colouring within {:e}", p3.min_max_deviation))?;
    ensure(p3.colorings_examined == (1 << 10) - 2, || format!("path3: {} colourings", p3.colorings_examined))?;
    let c4 = gcd_dichotomy_search(&pattern("cycle4"), 5, 0.5, 1e-12).unwrap();
    ensure(c4.hub_deviation <= 1e-12, || format!("cycle4: hub deviation {:e}", c4.hub_deviation))?;
    Ok(format!(
        "path3 min deviation {:.4} over {} colourings; cycle4 hub deviation {:.1e}",
        p3.min_max_deviation, p3.colorings_examined, c4.hub_deviation
    ))
}

fn ac5_color_balance() -> Outcome {
    let mut fixtures: Vec<(PatternGraph, f64, WeightedGraph)> = Vec::new();
    for name in ["path3", "cycle4", "star:3", "path:4"] {
        let h = pattern(name);
        for r in (h.h() + 2)..=6 {
            for p in [0.2, 0.3, 0.45] {
                let pair = conjugate(&h, p, CONJUGATE_TOL).unwrap();
                fixtures.push((h.clone(), p, WeightedGraph::uniform(r, p).unwrap()));
                fixtures.push((h.clone(), p, WeightedGraph::uniform(r, pair.p_bar).unwrap()));
                let (hub, _) = hub_weighted(r, &h, p).unwrap();
                fixtures.push((h.clone(), p, hub));
                let mirrored = WeightedGraph::from_fn(r, |_, j| if j == r - 1 { p } else { pair.p_bar }).unwrap();
                fixtures.push((h.clone(), p, mirrored));
            }
        }
    }
    let (mut classified, mut checks) = (0, 0);
    for (h, p, w) in &fixtures {
        let class = reconstruct(w, h, *p, 0.01, default_delta_tol(h, *p)).unwrap();
        if class.verdict == Verdict::MixedViolation {
            continue;
        }
        classified += 1;
        for phi in injective_maps(h.h(), w.r()) {
            let b = color_balance(&class, h, &phi).unwrap();
            ensure(b.balanced, || format!("{} r={} p={p}: unbalanced phi {:?}", h.name(), w.r(), b.phi))?;
            checks += 1;
        }
    }
    ensure(classified >= 20, || format!("only {classified} fixtures classified"))?;
    Ok(format!("{checks} maps balanced over {classified} classified fixtures"))
}

fn ac6_pairwise_regular() -> Outcome {
    let c = classify_pairwise_regular_up_to(7).unwrap();
    let forms = |list: Vec<&quasirand::lemmas::ClassifiedGraph>| -> BTreeSet<(usize, u32)> {
        list.into_iter().map(|g| g.canonical_form()).collect()
    };
    let known = |g: Graph| -> BTreeSet<(usize, u32)> {
        [canonical_form(&g).unwrap(), canonical_form(&g.complement()).unwrap()].into()
    };
    let pairwise = forms(c.nontrivial_pairwise());
    let outer = forms(c.nontrivial_outer());
    ensure(pairwise == known(Graph::star(2)), || format!("pairwise-regular classes {pairwise:?}"))?;
    ensure(outer == known(Graph::star(3)), || format!("outer-regular classes {outer:?}"))?;
    Ok(format!("{} labelled graphs on 2..=7 vertices; classes match", c.graphs_examined))
}

fn ac7_counting_lemma() -> Outcome {
    let w = WeightedGraph::uniform(3, 0.5).unwrap();
    let rep = counting_lemma_experiment(&w, &pattern("path3"), 50, 20_240_607).unwrap();
    ensure(rep.per_phi.iter().all(|c| c.weight_product == 0.125), || "W(phi) != 0.125".into())?;
    ensure(rep.max_deviation <= 0.03, || format!("max deviation {}", rep.max_deviation))?;
    Ok(format!("max |H*_phi/50^3 - 0.125| = {:.4} over {} maps", rep.max_deviation, rep.phis_examined))
}

/// Independent nested-loop oracle: every `h`-tuple of vertices with vertex `i`
/// drawn from `cands[i]`, distinct, matching the pattern's edges (and non-edges
/// when `induced`).
fn brute(g: &Graph, h: &PatternGraph, cands: &[Vec<usize>], induced: bool) -> u128 {
    fn rec(g: &Graph, h: &PatternGraph, cands: &[Vec<usize>], induced: bool, chosen: &mut Vec<usize>) -> u128 {
        let i = chosen.len();
        if i == h.h() {
            return 1;
        }
        let mut total = 0;
        for &v in &cands[i] {
            if chosen.contains(&v) {
                continue;
            }
            let ok = chosen.iter().enumerate().all(|(j, &u)| {
                let want = h.is_edge(j.min(i), j.max(i));
                let have = g.has_edge(u, v);
                if induced {
                    want == have
                } else {
                    !want || have
                }
            });
            if ok {
                chosen.push(v);
                total += rec(g, h, cands, induced, chosen);
                chosen.pop();
            }
        }
        total
    }
    rec(g, h, cands, induced, &mut Vec::new())
}

fn ac8_counting_oracles() -> Outcome {
    let patterns = ["path3", "clique:3", "empty:3", "cycle4", "star:3", "path:4", "clique:4"].map(pattern);
    let mut checks = 0;
    for trial in 0..50u64 {
        let mut rng = substream_indexed(7, "acceptance_ac8", trial);
        let n = rng.random_range(6..=10);
        let g = generate_gnp(n, rng.random_range(0.2..0.8), trial).unwrap();
        let all: Vec<usize> = (0..n).collect();
        for h in &patterns {
            let k = h.h();
            let same = vec![all.clone(); k];
            ensure(count_labeled(&g, h, &all).unwrap() == brute(&g, h, &same, false), || format!("labeled {}", h.name()))?;
            ensure(count_induced(&g, h, &all).unwrap() == brute(&g, h, &same, true), || format!("induced {}", h.name()))?;

            let mut order = all.clone();
            order.shuffle(&mut rng);
            let size = n / k;
            let sets: Vec<Vec<usize>> = (0..k).map(|i| order[i * size..(i + 1) * size].to_vec()).collect();
            let tuple = VertexSetTuple::new(sets.clone()).unwrap();
            ensure(count_labeled_tuple(&g, h, &tuple).unwrap() == brute(&g, h, &sets, false), || {
                format!("tuple {}", h.name())
            })?;
            for sigma in permutations(k) {
                let cands: Vec<Vec<usize>> = sigma.targets().iter().map(|&t| sets[t].clone()).collect();
                ensure(count_induced_sigma(&g, h, &tuple, &sigma).unwrap() == brute(&g, h, &cands, true), || {
                    format!("sigma {} {:?}", h.name(), sigma.targets())
                })?;
                checks += 1;
            }

            let r = k + 1;
            let size = n / r;
            let wide: Vec<Vec<usize>> = (0..r).map(|i| order[i * size..(i + 1) * size].to_vec()).collect();
            let wide_tuple = VertexSetTuple::new(wide.clone()).unwrap();
            let phis = injective_maps(k, r);
            let phi = &phis[rng.random_range(0..phis.len())];
            let cands: Vec<Vec<usize>> = phi.targets().iter().map(|&t| wide[t].clone()).collect();
            ensure(count_induced_phi(&g, h, &wide_tuple, phi).unwrap() == brute(&g, h, &cands, true), || {
                format!("phi {} {:?}", h.name(), phi.targets())
            })?;
            checks += 4;
        }
    }
    Ok(format!("{checks} counts equal the nested-loop oracle on 50 graphs"))
}

fn ac9_spectrum() -> Outcome {
    let get = |g: &Graph| {
        let d = check_p3(g, 0.5, 1e-12).unwrap();
        (d.components["lambda1"], d.components["lambda2"])
    };
    let (a1, a2) = get(&Graph::complete_bipartite(4, 4));
    ensure((a1 - 4.0).abs() <= 1e-8 && (a2 + 4.0).abs() <= 1e-8, || format!("K_4,4: {a1}, {a2}"))?;
    let (b1, b2) = get(&Graph::complete(5));
    ensure((b1 - 4.0).abs() <= 1e-8 && (b2 + 1.0).abs() <= 1e-8, || format!("K_5: {b1}, {b2}"))?;
    Ok(format!("K_4,4: ({a1:.10}, {a2:.10}); K_5: ({b1:.10}, {b2:.10})"))
}

fn ac10_end_to_end() -> Outcome {
    let p3 = pattern("path3");
    let pbar = conjugate(&p3, 0.5, CONJUGATE_TOL).unwrap().p_bar;
    let p2 = two_block_matching_cross_densities(&p3, 0.5, 0.5, 0.1).unwrap()[0];
    let mut runs = 0;
    for fixture_seed in [11u64, 12, 13] {
        let fixtures = [
            ("G(300, 1/2)", generate_gnp(300, 0.5, fixture_seed).unwrap(), AnalyzeVerdict::PQuasi),
            ("G(300, p_bar)", generate_gnp(300, pbar, fixture_seed).unwrap(), AnalyzeVerdict::PbarQuasi),
            ("two-block", two_block(300, 0.5, 0.1, p2, fixture_seed).unwrap(), AnalyzeVerdict::Inconclusive),
        ];
        for (name, g, want) in &fixtures {
            // stability: independent analysis seeds must agree
            for run_seed in [0u64, 1] {
                let cfg = AnalyzeConfig {
                    seed: run_seed,
                    budget: Budget::Sampled { samples: 500, seed: run_seed },
                    ..AnalyzeConfig::default()
                };
                let rep = analyze(g, &p3, 0.5, &cfg).unwrap();
                ensure(rep.verdict == *want, || {
                    format!("{name} seed {fixture_seed}/{run_seed}: {:?} ({:?})", rep.verdict, rep.diagnostics)
                })?;
                ensure(rep.is_sound(), || format!("{name}: unsound report"))?;
                if *want == AnalyzeVerdict::Inconclusive {
                    ensure(
                        rep.count_verdict(Verdict::MixedViolation) > 0
                            && rep.diagnostics.iter().any(|d| d.contains("MIXED_VIOLATION")),
                        || format!("{name}: no MIXED_VIOLATION diagnostics ({:?})", rep.diagnostics),
                    )?;
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} analyses, all verdicts as expected"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("AC1", ac1_inclusion_rank, 10),
        ("AC2", ac2_conjugate, 1),
        ("AC3", ac3_hub_round_trip, 5),
        ("AC4", ac4_gcd_dichotomy, 60),
        ("AC5", ac5_color_balance, 10),
        ("AC6", ac6_pairwise_regular, 60),
        ("AC7", ac7_counting_lemma, 5),
        ("AC8", ac8_counting_oracles, 30),
        ("AC9", ac9_spectrum, 1),
        ("AC10", ac10_end_to_end, 120),
    ];
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {:.2}s, budget {budget}s", elapsed.as_secs_f64()))
            }
        });
        match outcome {
            Ok(detail) => println!("{name} PASS ({:.2}s) {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                println!("{name} FAIL ({:.2}s) {detail}", elapsed.as_secs_f64());
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
