//! Recover pair weights of a weighted complete graph from its pattern products
//! `W(phi)`, classify each weight as `p` or `p_bar`, and test the two-colour
//! dichotomy.
//!
//! For an `h`-set `S`, summing `log W(phi)` over the `h!` maps onto `S` counts
//! every pair of `S` exactly `2 (h-2)!` times as the image of an edge-or-non-edge
//! slot, so dividing by `2 (h-2)!` leaves `sum_{ab in S} y_ab` with
//! `y_ab = m log w_ab + (C(h,2) - m) log(1 - w_ab)`. Solving the inclusion system
//! recovers every `y_ab`; each is then inverted back to a weight.
//!
//! `y` is two-to-one in `w` (one root either side of the peak `m / C(h,2)`), so
//! inversion uses the side of the peak on which the observed weight lies.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_interior, Error, Result};
use crate::graph::{choose2, pair_at, pair_index, WeightedGraph};
use crate::inclusion::{binomial, colex_rank, solve_inclusion_system};
use crate::pattern::{gcd, injective_maps, weighted_product_unchecked, InjectiveMap, PatternGraph};
use crate::quasirandom::{bisect, conjugate, delta_raw, log_f, DensityPair, BRACKET_EDGE};

pub const MAX_PHI_R: usize = 10;
pub const MAX_PHI_H: usize = 5;
pub const MAX_SEARCH_R: usize = 7;
pub const MAX_SEARCH_H: usize = 4;

const CONJUGATE_TOL: f64 = 1e-12;

/// Hypothesis tolerance for exact inputs: `1e-6 * delta_H(p)`.
pub fn default_delta_tol(pattern: &PatternGraph, p: f64) -> f64 {
    1e-6 * delta_raw(pattern, p)
}

/// `W(phi)` for a list of injective maps, with the largest distance from `delta_H(p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiEvaluation {
    pub r: usize,
    pub delta: f64,
    pub phis: Vec<InjectiveMap>,
    pub values: Vec<f64>,
    pub max_deviation: f64,
    /// Index into `phis` of the first map attaining `max_deviation`.
    pub worst: Option<usize>,
}

impl PhiEvaluation {
    /// Wrap externally computed values (e.g. normalized induced counts).
    pub fn from_values(r: usize, pattern: &PatternGraph, p: f64, phis: Vec<InjectiveMap>, values: Vec<f64>) -> Result<Self> {
        check_interior(p)?;
        if phis.len() != values.len() {
            return Err(Error::Arity {
                expected: phis.len(),
                got: values.len(),
            });
        }
        for phi in &phis {
            if phi.len() != pattern.h() {
                return Err(Error::Arity {
                    expected: pattern.h(),
                    got: phi.len(),
                });
            }
            InjectiveMap::new(phi.targets().to_vec(), r)?;
        }
        let delta = delta_raw(pattern, p);
        let (mut max_deviation, mut worst) = (0.0, None);
        for (i, v) in values.iter().enumerate() {
            let d = (v - delta).abs();
            if worst.is_none() || d > max_deviation {
                max_deviation = d;
                worst = Some(i);
            }
        }
        Ok(PhiEvaluation {
            r,
            delta,
            phis,
            values,
            max_deviation,
            worst,
        })
    }

    pub fn worst_phi(&self) -> Option<&InjectiveMap> {
        self.worst.map(|i| &self.phis[i])
    }
}

fn check_phi_caps(r: usize, h: usize) -> Result<()> {
    if r > MAX_PHI_R || h > MAX_PHI_H {
        return Err(Error::CapExceeded {
            what: format!("enumeration of all maps [{h}] -> [{r}]"),
            limit: format!("r <= {MAX_PHI_R}, h <= {MAX_PHI_H}"),
        });
    }
    if r < h {
        return Err(Error::Parameter(format!("need r >= h, got r = {r}, h = {h}")));
    }
    Ok(())
}

/// `W(phi)` for every injective `phi: [h] -> [r]`, in lexicographic order of maps.
pub fn evaluate_all_phi(w: &WeightedGraph, pattern: &PatternGraph, p: f64) -> Result<PhiEvaluation> {
    check_phi_caps(w.r(), pattern.h())?;
    let phis = injective_maps(pattern.h(), w.r());
    let values = phis
        .par_iter()
        .map(|phi| weighted_product_unchecked(w, pattern, phi.targets()))
        .collect();
    PhiEvaluation::from_values(w.r(), pattern, p, phis, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeLabel {
    AtP,
    AtPbar,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    UniformP,
    UniformPbar,
    /// Bulk at `p_bar`, the pairs at one vertex at `p`.
    HubP,
    /// Bulk at `p`, the pairs at one vertex at `p_bar`.
    HubPbar,
    MixedViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeClassification {
    pub r: usize,
    pub density: DensityPair,
    /// Per pair, colex order.
    pub labels: Vec<EdgeLabel>,
    /// Recovered weight per pair; `None` when recovery was skipped.
    pub recovered_x: Vec<Option<f64>>,
    /// Solved log variables `y`, colex order; empty when recovery was skipped.
    pub log_weights: Vec<f64>,
    pub residual_norm: Option<f64>,
    pub hypothesis_ok: bool,
    pub max_phi_deviation: f64,
    pub worst_phi: Option<Vec<usize>>,
    pub verdict: Verdict,
    /// Hub vertex for `HUB_*` verdicts.
    pub hub: Option<usize>,
    /// A map violating `a(phi) m = b(phi) (C(h,2) - m)` when one exists.
    pub witness_phi: Option<Vec<usize>>,
    pub diagnostics: Vec<String>,
}

impl EdgeClassification {
    pub fn label(&self, i: usize, j: usize) -> EdgeLabel {
        self.labels[pair_index(i.min(j), i.max(j))]
    }

    pub fn count(&self, label: EdgeLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Invert `y = m log x + (C(h,2) - m) log(1 - x)` on one side of the peak.
///
/// `high` selects the branch above `m / C(h,2)`. Targets above the peak value
/// clamp to the peak. Complete and edgeless patterns have a single branch.
pub fn invert_log_weight(pattern: &PatternGraph, y: f64, high: bool) -> f64 {
    let c = pattern.total_pairs() as f64;
    if pattern.m() == pattern.total_pairs() {
        return (y / c).exp().min(1.0);
    }
    if pattern.m() == 0 {
        return 1.0 - (y / c).exp().min(1.0);
    }
    let peak = pattern.m() as f64 / c;
    if high {
        1.0 - bisect(BRACKET_EDGE, 1.0 - peak, |q| log_f(pattern, 1.0 - q, q) - y)
    } else {
        bisect(BRACKET_EDGE, peak, |x| log_f(pattern, x, 1.0 - x) - y)
    }
}

fn classify_x(x: f64, d: &DensityPair, eps: f64) -> EdgeLabel {
    let to_p = (x - d.p).abs();
    let to_pbar = (x - d.p_bar).abs();
    match (to_p <= eps, to_pbar <= eps) {
        (true, true) => {
            if to_pbar < to_p {
                EdgeLabel::AtPbar
            } else {
                EdgeLabel::AtP
            }
        }
        (true, false) => EdgeLabel::AtP,
        (false, true) => EdgeLabel::AtPbar,
        (false, false) => EdgeLabel::Unresolved,
    }
}

/// `(a(phi), b(phi))` for a map: pattern non-edges and edges landing on blue (`AtP`) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColorBalance {
    pub phi: Vec<usize>,
    pub a_phi: usize,
    pub b_phi: usize,
    pub balanced: bool,
}

fn balance_counts(labels: &[EdgeLabel], pattern: &PatternGraph, targets: &[usize]) -> Option<(usize, usize)> {
    let (mut a, mut b) = (0, 0);
    for j in 1..pattern.h() {
        for i in 0..j {
            let (x, y) = (targets[i], targets[j]);
            match labels[pair_index(x.min(y), x.max(y))] {
                EdgeLabel::Unresolved => return None,
                EdgeLabel::AtP if pattern.is_edge(i, j) => b += 1,
                EdgeLabel::AtP => a += 1,
                EdgeLabel::AtPbar => {}
            }
        }
    }
    Some((a, b))
}

fn is_balanced(pattern: &PatternGraph, a: usize, b: usize) -> bool {
    a * pattern.m() == b * pattern.non_edges()
}

/// Colour counts of `phi` under a classification and whether they satisfy
/// `a(phi) m = b(phi) (C(h,2) - m)` exactly.
pub fn color_balance(c: &EdgeClassification, pattern: &PatternGraph, phi: &InjectiveMap) -> Result<ColorBalance> {
    if phi.len() != pattern.h() {
        return Err(Error::Arity {
            expected: pattern.h(),
            got: phi.len(),
        });
    }
    InjectiveMap::new(phi.targets().to_vec(), c.r)?;
    let (a, b) = balance_counts(&c.labels, pattern, phi.targets())
        .ok_or_else(|| Error::Precondition("map touches an unresolved pair".into()))?;
    Ok(ColorBalance {
        phi: phi.targets().to_vec(),
        a_phi: a,
        b_phi: b,
        balanced: is_balanced(pattern, a, b),
    })
}

fn first_unbalanced(labels: &[EdgeLabel], pattern: &PatternGraph, phis: &[InjectiveMap]) -> Option<Vec<usize>> {
    phis.iter()
        .find(|phi| matches!(balance_counts(labels, pattern, phi.targets()), Some((a, b)) if !is_balanced(pattern, a, b)))
        .map(|phi| phi.targets().to_vec())
}

/// The vertex touching every pair labeled differently from `bulk`, when there
/// are between 1 and `r - 1` such pairs.
fn hub_vertex(labels: &[EdgeLabel], r: usize, bulk: EdgeLabel) -> Option<usize> {
    let off: Vec<(usize, usize)> = labels
        .iter()
        .enumerate()
        .filter(|&(_, &l)| l != bulk)
        .map(|(i, _)| pair_at(i))
        .collect();
    if off.is_empty() || off.len() > r - 1 {
        return None;
    }
    let (a, b) = off[0];
    [a, b].into_iter().find(|&v| off.iter().all(|&(x, y)| x == v || y == v))
}

fn rhs_from_values(eval: &PhiEvaluation, pattern: &PatternGraph) -> Vec<f64> {
    let h = pattern.h();
    let mut rhs = vec![0.0; binomial(eval.r, h)];
    for (phi, &v) in eval.phis.iter().zip(&eval.values) {
        rhs[colex_rank(phi.image_mask())] += v.ln();
    }
    let scale = 2.0 * (1..=h - 2).map(|k| k as f64).product::<f64>();
    rhs.iter_mut().for_each(|x| *x /= scale);
    rhs
}

/// Classify pairs from pattern products.
///
/// `eval` must cover every injective map `[h] -> [r]`. `observed` holds one weight
/// estimate per pair (colex) and only decides which side of the peak each
/// recovered weight lies on.
pub fn reconstruct_from_values(
    eval: &PhiEvaluation,
    pattern: &PatternGraph,
    p: f64,
    eps: f64,
    delta_tol: f64,
    observed: &[f64],
) -> Result<EdgeClassification> {
    check_interior(p)?;
    let r = eval.r;
    let h = pattern.h();
    if r < h + 2 {
        return Err(Error::Parameter(format!("reconstruction needs r >= h + 2, got r = {r}, h = {h}")));
    }
    if !(eps > 0.0) || !(delta_tol > 0.0) {
        return Err(Error::Parameter(format!("tolerances must be positive, got eps = {eps}, delta_tol = {delta_tol}")));
    }
    let n_phi = binomial(r, h) * (1..=h).product::<usize>();
    if eval.phis.len() != n_phi {
        return Err(Error::Precondition(format!(
            "reconstruction needs all {n_phi} maps, got {}",
            eval.phis.len()
        )));
    }
    if observed.len() != choose2(r) {
        return Err(Error::Arity {
            expected: choose2(r),
            got: observed.len(),
        });
    }
    let density = conjugate(pattern, p, CONJUGATE_TOL)?;
    let pairs = choose2(r);
    let mut out = EdgeClassification {
        r,
        density,
        labels: vec![EdgeLabel::Unresolved; pairs],
        recovered_x: vec![None; pairs],
        log_weights: Vec::new(),
        residual_norm: None,
        hypothesis_ok: eval.max_deviation <= delta_tol,
        max_phi_deviation: eval.max_deviation,
        worst_phi: eval.worst_phi().map(|phi| phi.targets().to_vec()),
        verdict: Verdict::MixedViolation,
        hub: None,
        witness_phi: None,
        diagnostics: Vec::new(),
    };
    if !out.hypothesis_ok {
        out.diagnostics.push(format!(
            "hypothesis fails: max |W(phi) - delta| = {:e} exceeds {delta_tol:e}",
            eval.max_deviation
        ));
    }
    if let Some(i) = observed.iter().position(|&w| w <= 0.0 || w >= 1.0) {
        let (a, b) = pair_at(i);
        out.diagnostics.push(format!("pair ({a}, {b}) has boundary weight {}; logs diverge", observed[i]));
        return Ok(out);
    }
    if let Some(i) = eval.values.iter().position(|&v| !(v > 0.0)) {
        out.diagnostics.push(format!("W(phi) = {} for phi = {:?}; logs diverge", eval.values[i], eval.phis[i].targets()));
        out.witness_phi = Some(eval.phis[i].targets().to_vec());
        return Ok(out);
    }

    let system = solve_inclusion_system(h, r, &rhs_from_values(eval, pattern))?;
    let peak = pattern.m() as f64 / pattern.total_pairs() as f64;
    for (k, &y) in system.solution.iter().enumerate() {
        let x = invert_log_weight(pattern, y, observed[k] > peak);
        out.recovered_x[k] = Some(x);
        out.labels[k] = classify_x(x, &density, eps);
    }
    out.log_weights = system.solution;
    out.residual_norm = Some(system.residual_norm);
    decide(&mut out, pattern, &eval.phis);
    Ok(out)
}

fn decide(out: &mut EdgeClassification, pattern: &PatternGraph, phis: &[InjectiveMap]) {
    let unresolved = out.count(EdgeLabel::Unresolved);
    if unresolved > 0 {
        out.diagnostics.push(format!("{unresolved} pairs are within eps of neither p nor p_bar"));
        out.verdict = Verdict::MixedViolation;
        return;
    }
    let blue = out.count(EdgeLabel::AtP);
    if blue == out.labels.len() {
        out.verdict = Verdict::UniformP;
        return;
    }
    if blue == 0 {
        out.verdict = Verdict::UniformPbar;
        return;
    }
    out.witness_phi = first_unbalanced(&out.labels, pattern, phis);
    let g = gcd(pattern.total_pairs(), pattern.m());
    if g == 1 {
        out.diagnostics.push(format!(
            "both colours present but gcd(C(h,2), m) = 1 forces a single colour ({blue} AT_P, {} AT_PBAR)",
            out.labels.len() - blue
        ));
        out.verdict = Verdict::MixedViolation;
        return;
    }
    if out.witness_phi.is_some() {
        out.diagnostics.push("colour balance fails for some map".into());
        out.verdict = Verdict::MixedViolation;
        return;
    }
    for (bulk, verdict) in [(EdgeLabel::AtP, Verdict::HubPbar), (EdgeLabel::AtPbar, Verdict::HubP)] {
        if let Some(v) = hub_vertex(&out.labels, out.r, bulk) {
            out.hub = Some(v);
            out.verdict = verdict;
            return;
        }
    }
    out.diagnostics.push("off-colour pairs do not share a single vertex".into());
    out.verdict = Verdict::MixedViolation;
}

/// Reconstruct the classification of a weighted complete graph; the observed
/// side of each weight is the weight itself.
pub fn reconstruct(w: &WeightedGraph, pattern: &PatternGraph, p: f64, eps: f64, delta_tol: f64) -> Result<EdgeClassification> {
    check_interior(p)?;
    if w.r() < pattern.h() + 2 {
        return Err(Error::Parameter(format!(
            "reconstruction needs r >= h + 2, got r = {}, h = {}",
            w.r(),
            pattern.h()
        )));
    }
    let eval = evaluate_all_phi(w, pattern, p)?;
    reconstruct_from_values(&eval, pattern, p, eps, delta_tol, w.weights())
}

/// Result of the exhaustive search over non-uniform `{p, p_bar}` colourings of `K_r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub r: usize,
    pub density: DensityPair,
    pub pairs_edges_gcd: usize,
    pub colorings_examined: u64,
    /// `min` over colourings of `max_phi |W(phi) - delta_H(p)|`.
    pub min_max_deviation: f64,
    /// Blue (`p`) pairs of a minimizing colouring, as a colex bitmask.
    pub argmin_blue_mask: u64,
    /// Colourings with deviation at most `tol`.
    pub colorings_within_tol: u64,
    /// Deviation of the colouring with `p_bar` exactly on the pairs at vertex `r - 1`.
    pub hub_deviation: f64,
}

/// For every colouring of `K_r`'s pairs by `{p, p_bar}` using both colours,
/// evaluate every `W(phi)` and report the best achievable maximum deviation.
pub fn gcd_dichotomy_search(pattern: &PatternGraph, r: usize, p: f64, tol: f64) -> Result<DichotomyReport> {
    check_interior(p)?;
    if r > MAX_SEARCH_R || pattern.h() > MAX_SEARCH_H {
        return Err(Error::CapExceeded {
            what: format!("colouring search with r = {r}, h = {}", pattern.h()),
            limit: format!("r <= {MAX_SEARCH_R}, h <= {MAX_SEARCH_H}"),
        });
    }
    if r < pattern.h() {
        return Err(Error::Parameter(format!("need r >= h, got r = {r}, h = {}", pattern.h())));
    }
    if pattern.is_trivial() {
        return Err(Error::Precondition("complete or edgeless pattern: p_bar = p, colourings are meaningless".into()));
    }
    let density = conjugate(pattern, p, CONJUGATE_TOL)?;
    let (m, k) = (pattern.m(), pattern.non_edges());
    // table[a][b]: a blue non-edges, b blue edges
    let table: Vec<Vec<f64>> = (0..=k)
        .map(|a| {
            (0..=m)
                .map(|b| {
                    density.p.powi(b as i32)
                        * density.p_bar.powi((m - b) as i32)
                        * (1.0 - density.p).powi(a as i32)
                        * (1.0 - density.p_bar).powi((k - a) as i32)
                })
                .collect()
        })
        .collect();
    let masks: Vec<(u32, u32)> = injective_maps(pattern.h(), r)
        .iter()
        .map(|phi| {
            let t = phi.targets();
            let (mut e, mut ne) = (0u32, 0u32);
            for j in 1..pattern.h() {
                for i in 0..j {
                    let bit = 1u32 << pair_index(t[i].min(t[j]), t[i].max(t[j]));
                    if pattern.is_edge(i, j) {
                        e |= bit;
                    } else {
                        ne |= bit;
                    }
                }
            }
            (e, ne)
        })
        .collect();
    let delta = density.delta;
    let deviation = |blue: u32, cutoff: f64| -> f64 {
        let mut worst: f64 = 0.0;
        for &(e, ne) in &masks {
            let d = (table[(blue & ne).count_ones() as usize][(blue & e).count_ones() as usize] - delta).abs();
            if d > worst {
                worst = d;
                if worst > cutoff {
                    break;
                }
            }
        }
        worst
    };
    let pairs = choose2(r);
    let full: u32 = if pairs == 32 { u32::MAX } else { (1u32 << pairs) - 1 };
    // (best deviation, its mask, count within tol); exact deviations only matter up to the running best
    let (best, arg, within) = (1..full)
        .into_par_iter()
        .fold(
            || (f64::INFINITY, u32::MAX, 0u64),
            |(best, arg, within), blue| {
                let d = deviation(blue, best.max(tol));
                let within = within + (d <= tol) as u64;
                if d < best || (d == best && blue < arg) {
                    (d, blue, within)
                } else {
                    (best, arg, within)
                }
            },
        )
        .reduce(
            || (f64::INFINITY, u32::MAX, 0u64),
            |x, y| {
                let within = x.2 + y.2;
                if y.0 < x.0 || (y.0 == x.0 && y.1 < x.1) {
                    (y.0, y.1, within)
                } else {
                    (x.0, x.1, within)
                }
            },
        );
    let hub_blue = (0..pairs).filter(|&i| pair_at(i).1 != r - 1).fold(0u32, |m, i| m | 1 << i);
    Ok(DichotomyReport {
        r,
        density,
        pairs_edges_gcd: pattern.pairs_edges_gcd(),
        colorings_examined: u64::from(full) - 1,
        min_max_deviation: best,
        argmin_blue_mask: u64::from(arg),
        colorings_within_tol: within,
        hub_deviation: deviation(hub_blue, f64::INFINITY),
    })
}
