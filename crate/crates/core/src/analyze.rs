//! End-to-end pipeline: from a graph and a declared density, decide between
//! `p`-quasi-random, `p_bar`-quasi-random and inconclusive.
//!
//! Steps: equipartition, per-pair regularity and density, reduced weighted
//! graph on the regular pairs, reconstruction on its `K_r`s, two-colouring with
//! a majority rule, and a final P1 check under the winning density.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_interior, Error, Result};
use crate::generate::CONJUGATE_TOL;
use crate::graph::{choose2, pair_index, Graph, VertexSetTuple};
use crate::inclusion::{binomial, colex_subsets, mask_members};
use crate::pattern::{count_induced_phi, injective_maps, InjectiveMap, PatternGraph};
use crate::quasirandom::{check_p1, conjugate, Budget, DensityPair, PropertyDeviation};
use crate::reconstruct::{reconstruct_from_values, EdgeLabel, PhiEvaluation, Verdict as CliqueVerdict, MAX_PHI_H, MAX_PHI_R};
use crate::regularity::{spectral_witness_vectors, test_pair, Partition, RegularityConfig, RegularityMode};
use crate::rng::substream;

/// Stamped into every report.
pub const PARTITION_DEVIATION: &str =
    "regularity partition replaced by a seeded random equipartition (refined once by spectral order when too few pairs are regular)";

/// All `K_r`s are examined when `C(k, r)` is at most this.
pub const KR_EXHAUSTIVE_LIMIT: usize = 10_000;
/// Number of `K_r`s sampled otherwise.
pub const KR_SAMPLE_SIZE: usize = 1_000;
/// Parts are addressed as bits of a `u64`.
pub const MAX_PARTS: usize = 63;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeConfig {
    /// Number of parts.
    pub k: usize,
    /// Clique size in the reduced graph.
    pub r: usize,
    /// Density window, classification window and majority-rule tolerance.
    pub eps: f64,
    /// Regularity parameter; `eps` when unset.
    pub gamma: Option<f64>,
    /// Absolute tolerance on `|H*_phi / s^h - delta_H(p)|`; `0.5 delta_H(p)` when unset.
    pub delta_tol: Option<f64>,
    /// Largest accepted final P1 deviation.
    pub p1_threshold: f64,
    /// Random half-splits per pair in the regularity heuristic.
    pub regularity_candidates: usize,
    /// Budget of the final P1 check.
    pub budget: Budget,
    pub seed: u64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            k: 12,
            r: 5,
            eps: 0.15,
            gamma: None,
            delta_tol: None,
            p1_threshold: 0.02,
            regularity_candidates: 8,
            budget: Budget::Sampled { samples: 500, seed: 0 },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalyzeVerdict {
    PQuasi,
    PbarQuasi,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    RandomEquipartition,
    SpectralRefinement,
}

/// One pair of parts in the reduced graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedPair {
    pub i: usize,
    pub j: usize,
    pub density: f64,
    pub regular: bool,
    pub mode: RegularityMode,
    pub max_gap: f64,
    /// Colour from the `K_r` classifications covering the pair.
    pub color: PairColor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairColor {
    /// Classified near `p` by every covering `K_r` vote majority.
    Blue,
    /// Classified near `p_bar`.
    Red,
    /// Votes tied or unresolved.
    Split,
    /// Irregular, or in no examined `K_r`.
    Uncolored,
}

/// Outcome of the reconstruction on one `K_r` of the reduced graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueResult {
    /// Part indices, increasing.
    pub parts: Vec<usize>,
    pub verdict: CliqueVerdict,
    pub hypothesis_ok: bool,
    pub max_phi_deviation: f64,
    pub at_p: usize,
    pub at_pbar: usize,
    pub unresolved: usize,
    /// Hub as a part index.
    pub hub: Option<usize>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ColorTally {
    pub blue: usize,
    pub red: usize,
    pub split: usize,
    pub uncolored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiRandomReport {
    pub n: usize,
    pub edge_density: f64,
    pub pattern: String,
    pub p: f64,
    pub density_pair: DensityPair,
    pub config: AnalyzeConfig,
    pub gamma: f64,
    pub delta_tol: f64,
    pub partition_deviation: &'static str,
    pub partition_method: PartitionMethod,
    pub k: usize,
    /// Common part size used for the normalized counts.
    pub count_part_size: usize,
    pub regular_pair_fraction: f64,
    pub reduced: Vec<ReducedPair>,
    /// `K_r`s of the regular-pair graph examined, and whether they were sampled.
    pub cliques_examined: usize,
    pub cliques_sampled: bool,
    pub cliques: Vec<CliqueResult>,
    pub tally: ColorTally,
    pub verdict: AnalyzeVerdict,
    /// Density the verdict refers to.
    pub winning_density: Option<f64>,
    pub final_p1: Option<PropertyDeviation>,
    pub diagnostics: Vec<String>,
}

impl QuasiRandomReport {
    /// A decisive verdict implies the density condition and a final P1 deviation within threshold.
    pub fn is_sound(&self) -> bool {
        match (self.verdict, self.winning_density, &self.final_p1) {
            (AnalyzeVerdict::Inconclusive, ..) => true,
            (_, Some(target), Some(p1)) => {
                let total = self.reduced.len() as f64;
                let good = self
                    .reduced
                    .iter()
                    .filter(|q| q.regular && (q.density - target).abs() <= self.config.eps)
                    .count() as f64;
                p1.deviation <= self.config.p1_threshold && good >= (1.0 - self.config.eps) * total
            }
            _ => false,
        }
    }

    pub fn count_verdict(&self, v: CliqueVerdict) -> usize {
        self.cliques.iter().filter(|c| c.verdict == v).count()
    }
}

struct PairScan {
    pairs: Vec<ReducedPair>,
    regular_fraction: f64,
}

fn scan_pairs(g: &Graph, partition: &Partition, cfg: &RegularityConfig) -> Result<PairScan> {
    let vectors = spectral_witness_vectors(g, 2)?;
    let k = partition.k();
    let index: Vec<(usize, usize)> = (1..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let pairs: Vec<ReducedPair> = index
        .par_iter()
        .map(|&(i, j)| {
            let reg = test_pair(g, partition.part(i), partition.part(j), cfg, &vectors, pair_index(i, j) as u64)?;
            Ok(ReducedPair {
                i,
                j,
                density: reg.density,
                regular: reg.regular,
                mode: reg.mode,
                max_gap: reg.max_gap,
                color: PairColor::Uncolored,
            })
        })
        .collect::<Result<_>>()?;
    let regular_fraction = pairs.iter().filter(|q| q.regular).count() as f64 / pairs.len() as f64;
    Ok(PairScan { pairs, regular_fraction })
}

/// Cliques of size `r` in the graph of regular pairs on `k` parts, as sorted part lists.
fn select_cliques(pairs: &[ReducedPair], k: usize, r: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let regular = |i: usize, j: usize| pairs[pair_index(i.min(j), i.max(j))].regular;
    let is_clique = |c: &[usize]| c.iter().enumerate().all(|(x, &a)| c[x + 1..].iter().all(|&b| regular(a, b)));
    if binomial(k, r) <= KR_EXHAUSTIVE_LIMIT {
        let all = colex_subsets(k, r)
            .into_iter()
            .map(mask_members)
            .filter(|c| is_clique(c))
            .collect();
        return (all, false);
    }
    let mut rng = substream(seed, "kr_sample");
    let mut found = BTreeSet::new();
    for _ in 0..100 * KR_SAMPLE_SIZE {
        if found.len() == KR_SAMPLE_SIZE {
            break;
        }
        let mut c = rand::seq::index::sample(&mut rng, k, r).into_vec();
        c.sort_unstable();
        if is_clique(&c) {
            found.insert(c);
        }
    }
    (found.into_iter().collect(), true)
}

fn spectral_partition(g: &Graph, k: usize) -> Result<Option<Partition>> {
    let Some(v) = spectral_witness_vectors(g, 1)?.into_iter().next() else {
        return Ok(None);
    };
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    Partition::from_order(&order, k).map(Some)
}

fn check_config(g: &Graph, pattern: &PatternGraph, cfg: &AnalyzeConfig) -> Result<()> {
    let h = pattern.h();
    if cfg.r < h + 2 || cfg.k < cfg.r {
        return Err(Error::Parameter(format!(
            "need k >= r >= h + 2, got k = {}, r = {}, h = {h}",
            cfg.k, cfg.r
        )));
    }
    if cfg.k > MAX_PARTS || cfg.r > MAX_PHI_R || h > MAX_PHI_H {
        return Err(Error::CapExceeded {
            what: format!("analysis with k = {}, r = {}, h = {h}", cfg.k, cfg.r),
            limit: format!("k <= {MAX_PARTS}, r <= {MAX_PHI_R}, h <= {MAX_PHI_H}"),
        });
    }
    if g.n() < cfg.k * h {
        return Err(Error::Precondition(format!("need n >= k h = {}, got n = {}", cfg.k * h, g.n())));
    }
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if !positive(cfg.eps) || !positive(cfg.p1_threshold) || !cfg.gamma.is_none_or(positive) || !cfg.delta_tol.is_none_or(positive) {
        return Err(Error::Parameter("tolerances must be positive".into()));
    }
    Ok(())
}

/// Run the pipeline on `g` for pattern `H` and declared density `p`.
pub fn analyze(g: &Graph, pattern: &PatternGraph, p: f64, cfg: &AnalyzeConfig) -> Result<QuasiRandomReport> {
    check_interior(p)?;
    check_config(g, pattern, cfg)?;
    let density = conjugate(pattern, p, CONJUGATE_TOL)?;
    let gamma = cfg.gamma.unwrap_or(cfg.eps).min(1.0);
    let delta_tol = cfg.delta_tol.unwrap_or(0.5 * density.delta);
    let reg_cfg = RegularityConfig {
        gamma,
        random_candidates: cfg.regularity_candidates,
        seed: cfg.seed,
    };
    let mut diagnostics = Vec::new();

    let mut partition = Partition::random(g.n(), cfg.k, cfg.seed)?;
    let mut method = PartitionMethod::RandomEquipartition;
    let mut scan = scan_pairs(g, &partition, &reg_cfg)?;
    if scan.regular_fraction < 1.0 - cfg.eps {
        diagnostics.push(format!(
            "random equipartition: only {:.3} of pairs regular",
            scan.regular_fraction
        ));
        if let Some(refined) = spectral_partition(g, cfg.k)? {
            let refined_scan = scan_pairs(g, &refined, &reg_cfg)?;
            if refined_scan.regular_fraction > scan.regular_fraction {
                partition = refined;
                scan = refined_scan;
                method = PartitionMethod::SpectralRefinement;
                diagnostics.push(format!(
                    "spectral refinement: {:.3} of pairs regular",
                    scan.regular_fraction
                ));
            }
        }
    }
    let mut pairs = scan.pairs;

    let (cliques, sampled) = select_cliques(&pairs, cfg.k, cfg.r, cfg.seed);
    let s = partition.parts().iter().map(Vec::len).min().expect("k >= 1");
    let sets = VertexSetTuple::new(partition.parts().iter().map(|part| part[..s].to_vec()).collect())?;
    let local_phis = injective_maps(pattern.h(), cfg.r);
    let needed: BTreeSet<Vec<usize>> = cliques
        .iter()
        .flat_map(|c| local_phis.iter().map(move |phi| phi.targets().iter().map(|&t| c[t]).collect()))
        .collect();
    let scale = (s as f64).powi(pattern.h() as i32);
    let counts: HashMap<Vec<usize>, f64> = needed
        .into_par_iter()
        .map(|targets| {
            let phi = InjectiveMap::new(targets.clone(), cfg.k)?;
            let c = count_induced_phi(g, pattern, &sets, &phi)?;
            Ok((targets, c as f64 / scale))
        })
        .collect::<Result<_>>()?;

    let results: Vec<(CliqueResult, Vec<EdgeLabel>)> = cliques
        .par_iter()
        .map(|c| {
            let values = local_phis
                .iter()
                .map(|phi| counts[&phi.targets().iter().map(|&t| c[t]).collect::<Vec<_>>()])
                .collect();
            let eval = PhiEvaluation::from_values(cfg.r, pattern, p, local_phis.clone(), values)?;
            let observed: Vec<f64> = (0..choose2(cfg.r))
                .map(|q| {
                    let (a, b) = crate::graph::pair_at(q);
                    pairs[pair_index(c[a], c[b])].density
                })
                .collect();
            let class = reconstruct_from_values(&eval, pattern, p, cfg.eps, delta_tol, &observed)?;
            Ok((
                CliqueResult {
                    parts: c.clone(),
                    verdict: class.verdict,
                    hypothesis_ok: class.hypothesis_ok,
                    max_phi_deviation: class.max_phi_deviation,
                    at_p: class.count(EdgeLabel::AtP),
                    at_pbar: class.count(EdgeLabel::AtPbar),
                    unresolved: class.count(EdgeLabel::Unresolved),
                    hub: class.hub.map(|v| c[v]),
                    diagnostics: class.diagnostics,
                },
                class.labels,
            ))
        })
        .collect::<Result<_>>()?;

    // votes[pair] = (blue, red, unresolved)
    let mut votes = vec![(0usize, 0usize, 0usize); pairs.len()];
    for ((res, labels), c) in results.iter().zip(&cliques) {
        debug_assert_eq!(&res.parts, c);
        for (q, label) in labels.iter().enumerate() {
            let (a, b) = crate::graph::pair_at(q);
            let v = &mut votes[pair_index(c[a], c[b])];
            match label {
                EdgeLabel::AtP => v.0 += 1,
                EdgeLabel::AtPbar => v.1 += 1,
                EdgeLabel::Unresolved => v.2 += 1,
            }
        }
    }
    let mut tally = ColorTally::default();
    for (pair, &(blue, red, unresolved)) in pairs.iter_mut().zip(&votes) {
        pair.color = if blue + red + unresolved == 0 {
            PairColor::Uncolored
        } else if blue > red + unresolved {
            PairColor::Blue
        } else if red > blue + unresolved {
            PairColor::Red
        } else {
            PairColor::Split
        };
        match pair.color {
            PairColor::Blue => tally.blue += 1,
            PairColor::Red => tally.red += 1,
            PairColor::Split => tally.split += 1,
            PairColor::Uncolored => tally.uncolored += 1,
        }
    }
    let cliques_out: Vec<CliqueResult> = results.into_iter().map(|(r, _)| r).collect();

    let mut report = QuasiRandomReport {
        n: g.n(),
        edge_density: g.density(),
        pattern: pattern.name().to_string(),
        p,
        density_pair: density,
        config: cfg.clone(),
        gamma,
        delta_tol,
        partition_deviation: PARTITION_DEVIATION,
        partition_method: method,
        k: cfg.k,
        count_part_size: s,
        regular_pair_fraction: scan.regular_fraction,
        reduced: pairs,
        cliques_examined: cliques_out.len(),
        cliques_sampled: sampled,
        cliques: cliques_out,
        tally,
        verdict: AnalyzeVerdict::Inconclusive,
        winning_density: None,
        final_p1: None,
        diagnostics,
    };
    decide(g, &mut report)?;
    debug_assert!(report.is_sound());
    Ok(report)
}

struct Decision {
    verdict: AnalyzeVerdict,
    target: Option<f64>,
    p1: Option<PropertyDeviation>,
}

fn decide(g: &Graph, report: &mut QuasiRandomReport) -> Result<()> {
    let mut d = Vec::new();
    let decision = decide_with(g, report, &mut d)?;
    report.diagnostics.extend(d);
    report.verdict = decision.verdict;
    report.winning_density = decision.target;
    report.final_p1 = decision.p1;
    Ok(())
}

fn decide_with(g: &Graph, report: &QuasiRandomReport, d: &mut Vec<String>) -> Result<Decision> {
    let inconclusive = |p1| Decision {
        verdict: AnalyzeVerdict::Inconclusive,
        target: None,
        p1,
    };
    let cfg = &report.config;
    let total = report.reduced.len();
    if report.cliques.is_empty() {
        d.push(format!("too few regular pairs: no K_{} among regular pairs", cfg.r));
        return Ok(inconclusive(None));
    }
    let mixed = report.count_verdict(CliqueVerdict::MixedViolation);
    let failed = report.cliques.iter().filter(|c| !c.hypothesis_ok).count();
    if mixed > 0 {
        d.push(format!("MIXED_VIOLATION in {mixed} of {} K_r", report.cliques.len()));
        if let Some(c) = report.cliques.iter().find(|c| c.verdict == CliqueVerdict::MixedViolation) {
            d.push(format!("first MIXED_VIOLATION on parts {:?}: {}", c.parts, c.diagnostics.join("; ")));
        }
    }
    if failed > 0 {
        d.push(format!("counts off delta_H(p) beyond delta_tol in {failed} of {} K_r", report.cliques.len()));
    }
    if mixed > 0 || failed > 0 {
        return Ok(inconclusive(None));
    }
    let limit = cfg.eps / 2.0 * total as f64;
    let t = report.tally;
    let (target, verdict) = if (t.red as f64) <= limit && t.blue >= t.red {
        (report.density_pair.p, AnalyzeVerdict::PQuasi)
    } else if (t.blue as f64) <= limit {
        (report.density_pair.p_bar, AnalyzeVerdict::PbarQuasi)
    } else {
        d.push(format!("split colour tallies: {} blue, {} red, limit {limit}", t.blue, t.red));
        return Ok(inconclusive(None));
    };
    let good = report
        .reduced
        .iter()
        .filter(|q| q.regular && (q.density - target).abs() <= cfg.eps)
        .count();
    if (good as f64) < (1.0 - cfg.eps) * total as f64 {
        d.push(format!(
            "only {good} of {total} pairs are regular with density {target} +- {}",
            cfg.eps
        ));
        return Ok(inconclusive(None));
    }
    let p1 = check_p1(g, target, cfg.budget)?;
    if p1.deviation > cfg.p1_threshold {
        d.push(format!("final P1 deviation {} exceeds {}", p1.deviation, cfg.p1_threshold));
        return Ok(inconclusive(Some(p1)));
    }
    Ok(Decision {
        verdict,
        target: Some(target),
        p1: Some(p1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_gnp, two_block};
    use crate::quasirandom::two_block_matching_cross_densities;

    fn p3() -> PatternGraph {
        PatternGraph::builtin("path3").unwrap()
    }

    #[test]
    fn gnp_half_is_p_quasi() {
        let g = generate_gnp(300, 0.5, 1).unwrap();
        let rep = analyze(&g, &p3(), 0.5, &AnalyzeConfig::default()).unwrap();
        assert_eq!(rep.verdict, AnalyzeVerdict::PQuasi, "{:?}", rep.diagnostics);
        assert!(rep.is_sound());
        assert_eq!(rep.partition_method, PartitionMethod::RandomEquipartition);
        assert_eq!(rep.cliques_examined, 792);
        assert_eq!(rep.partition_deviation, PARTITION_DEVIATION);
    }

    #[test]
    fn gnp_conjugate_is_pbar_quasi_and_mirrors() {
        let pbar = conjugate(&p3(), 0.5, CONJUGATE_TOL).unwrap().p_bar;
        let g = generate_gnp(300, pbar, 2).unwrap();
        let cfg = AnalyzeConfig::default();
        let rep = analyze(&g, &p3(), 0.5, &cfg).unwrap();
        assert_eq!(rep.verdict, AnalyzeVerdict::PbarQuasi, "{:?}", rep.diagnostics);
        let mirrored = analyze(&g, &p3(), pbar, &cfg).unwrap();
        assert_eq!(mirrored.verdict, AnalyzeVerdict::PQuasi, "{:?}", mirrored.diagnostics);
    }

    #[test]
    fn two_block_is_inconclusive_with_mixed_violation() {
        let p2 = two_block_matching_cross_densities(&p3(), 0.5, 0.5, 0.1).unwrap()[0];
        let g = two_block(300, 0.5, 0.1, p2, 3).unwrap();
        let rep = analyze(&g, &p3(), 0.5, &AnalyzeConfig::default()).unwrap();
        assert_eq!(rep.verdict, AnalyzeVerdict::Inconclusive);
        assert!(rep.count_verdict(CliqueVerdict::MixedViolation) > 0);
        assert!(rep.diagnostics.iter().any(|d| d.contains("MIXED_VIOLATION")), "{:?}", rep.diagnostics);
    }

    #[test]
    fn rejects_bad_config() {
        let g = generate_gnp(60, 0.5, 1).unwrap();
        let cfg = AnalyzeConfig { r: 4, ..AnalyzeConfig::default() };
        assert!(analyze(&g, &p3(), 0.5, &cfg).is_err());
        let cfg = AnalyzeConfig { k: 30, ..AnalyzeConfig::default() };
        assert!(analyze(&g, &p3(), 0.5, &cfg).is_err());
        assert!(analyze(&g, &p3(), 1.0, &AnalyzeConfig::default()).is_err());
    }

    #[test]
    fn clique_sampling_is_seeded() {
        let pairs: Vec<ReducedPair> = (0..choose2(40))
            .map(|q| {
                let (i, j) = crate::graph::pair_at(q);
                ReducedPair {
                    i,
                    j,
                    density: 0.5,
                    regular: (i + j) % 7 != 0,
                    mode: RegularityMode::Heuristic,
                    max_gap: 0.0,
                    color: PairColor::Uncolored,
                }
            })
            .collect();
        let (a, sampled) = select_cliques(&pairs, 40, 5, 9);
        assert!(sampled && a.len() == KR_SAMPLE_SIZE);
        assert_eq!(a, select_cliques(&pairs, 40, 5, 9).0);
        let (b, sampled) = select_cliques(&pairs[..choose2(10)], 10, 5, 9);
        assert!(!sampled && !b.is_empty());
    }
}
