use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "quasirand", version, about = "Quasi-randomness from induced-subgraph statistics at desk scale")]
pub struct Cli {
    /// Base seed for every randomized step.
    #[arg(long, global = true, env = "QUASIRAND_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (report JSON, or the generated graph for `gen`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Count labeled or induced copies of a pattern.
    Count(CountArgs),
    /// Deviations for P1-P5, and P_H, P*_H when a pattern is given.
    Props(PropsArgs),
    /// Conjugate density of a pattern.
    Conjugate(ConjugateArgs),
    /// Classify the pairs of a weighted complete graph.
    Reconstruct(ReconstructArgs),
    /// Write a random or counterexample graph.
    Gen(GenArgs),
    /// Run the lemma experiments and print a pass/fail table.
    Lemmas(LemmasArgs),
    /// Decide whether a graph is quasi-random at p or at p_bar.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Labeled,
    Induced,
    Tuple,
    Sigma,
    Phi,
}

#[derive(Debug, Args, Serialize)]
pub struct CountArgs {
    /// Builtin name (path3, cycle4, clique:h, ...) or a graph file.
    #[arg(long)]
    pub pattern: String,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = CountMode::Labeled)]
    pub mode: CountMode,
    /// Vertex sets as `0,1;2,3;4,5` (tuple, sigma and phi modes).
    #[arg(long)]
    pub sets: Option<String>,
    /// Permutation of the pattern vertices as `1,0,2`.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Map from pattern vertices to set indices as `0,2,1`.
    #[arg(long)]
    pub phi: Option<String>,
    /// Emit a JSON report instead of the bare count.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PropsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = probability)]
    pub p: f64,
    /// Also run P_H and P*_H for this pattern.
    #[arg(long)]
    pub pattern: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Enumerate every witness instead of sampling (small graphs only).
    #[arg(long)]
    pub exhaustive: bool,
    /// Cycle length for P4.
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    /// Set-size fraction for P5.
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConjugateArgs {
    #[arg(long)]
    pub pattern: String,
    #[arg(long, value_parser = probability)]
    pub p: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub pattern: String,
    #[arg(long, value_parser = probability)]
    pub p: f64,
    #[arg(long)]
    pub weights: PathBuf,
    /// Classification window around p and p_bar.
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    pub eps: f64,
    /// Tolerance on |W(phi) - delta_H(p)|; 1e-6 delta_H(p) when unset.
    #[arg(long, value_parser = positive)]
    pub delta_tol: Option<f64>,
    /// Expected verdict (UNIFORM_P, UNIFORM_PBAR, HUB_P, HUB_PBAR, HUB, MIXED_VIOLATION).
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// gnp, balanced_bipartite, clique_plus_bipartite, two_block or hub_weighted.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = probability)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = probability)]
    pub p1: Option<f64>,
    /// Cross-block density; derived from --pattern and --p when unset.
    #[arg(long, value_parser = probability)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub pattern: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Classify,
    Coverage,
    Bichromatic,
    Counting,
}

#[derive(Debug, Args, Serialize)]
pub struct LemmasArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Largest graph order for the classification.
    #[arg(long, default_value_t = 7)]
    pub n_max: usize,
    /// Graph for the coverage suite; G(40, 1/2) when unset.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Clique size (coverage default 3, bichromatic default 5).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Pattern for the counting suite.
    #[arg(long, default_value = "path3")]
    pub pattern: String,
    /// Uniform weight for the counting suite.
    #[arg(long, default_value_t = 0.5, value_parser = probability)]
    pub p: f64,
    /// Part size for the counting suite.
    #[arg(long, default_value_t = 50)]
    pub part_size: usize,
    /// Accepted counting deviation.
    #[arg(long, default_value_t = 0.03, value_parser = positive)]
    pub eps: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub pattern: String,
    #[arg(long, value_parser = probability)]
    pub p: f64,
    #[arg(long, default_value_t = 12)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub r: usize,
    #[arg(long, default_value_t = 0.15, value_parser = positive)]
    pub eps: f64,
    /// Regularity parameter; eps when unset.
    #[arg(long, value_parser = positive)]
    pub gamma: Option<f64>,
    /// Tolerance on normalized counts; 0.5 delta_H(p) when unset.
    #[arg(long, value_parser = positive)]
    pub delta_tol: Option<f64>,
    #[arg(long, default_value_t = 0.02, value_parser = positive)]
    pub p1_threshold: f64,
    /// Subsets sampled by the final P1 check.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Expected verdict (P_QUASI, PBAR_QUASI, INCONCLUSIVE).
    #[arg(long)]
    pub expect: Option<String>,
}

fn probability(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} must be positive"))
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count(_) => "count",
            Command::Props(_) => "props",
            Command::Conjugate(_) => "conjugate",
            Command::Reconstruct(_) => "reconstruct",
            Command::Gen(_) => "gen",
            Command::Lemmas(_) => "lemmas",
            Command::Analyze(_) => "analyze",
        }
    }
}
