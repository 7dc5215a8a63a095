use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("density {0} must lie strictly inside (0, 1)")]
    BoundaryDensity(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex sets overlap at vertex {0}")]
    Overlap(usize),
    #[error("expected {expected} vertex sets, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("map is not injective: {0:?}")]
    NotInjective(Vec<usize>),
    #[error("map is not a permutation of 0..{h}: {map:?}")]
    NotPermutation { map: Vec<usize>, h: usize },
    #[error("{what} exceeds the desk-scale cap ({limit})")]
    CapExceeded { what: String, limit: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("symmetric eigensolver did not converge")]
    EigenNonConvergence,
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Probability(p))
    }
}

pub(crate) fn check_interior(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::BoundaryDensity(p))
    }
}
