//! Induced-subgraph statistics and quasi-randomness analysis for simple graphs.
//!
//! The crate measures how far a graph's edge and induced-pattern statistics are
//! from those of the binomial random graph `G(n, p)`, and recovers the
//! underlying edge densities from induced-pattern densities through the
//! log-linear inclusion-matrix system.
//!
//! Modules, bottom-up:
//! - [`graph`], [`io`], [`generate`]: graphs, weighted complete graphs, file
//!   formats and seeded generators.
//! - [`pattern`]: exact labeled / induced pattern counting.
//! - [`quasirandom`]: `delta_H(p)`, the conjugate density and the property checkers.
//! - [`inclusion`]: inclusion matrices, exact rank and the log-system solve.
//! - [`reconstruct`]: density recovery and the two-colour dichotomy.
//! - [`lemmas`], [`regularity`]: small-scale experiments on the supporting lemmas.
//! - [`analyze`]: the end-to-end verdict pipeline.

pub mod analyze;
pub mod error;
pub mod generate;
pub mod graph;
pub mod inclusion;
pub mod io;
pub mod lemmas;
pub mod pattern;
pub mod quasirandom;
pub mod reconstruct;
pub mod regularity;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSetTuple, WeightedGraph};
pub use pattern::{InjectiveMap, PatternGraph};
pub use quasirandom::{conjugate, delta_h, DensityPair};
