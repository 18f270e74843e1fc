use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "not a proper contraction: singular values ({c1}, {c2}) must satisfy 0 < c1 <= c2 < 1"
    )]
    NotAContraction { c1: f64, c2: f64 },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("branch {branch} maps the ambient box outside itself")]
    BranchLeavesBox { branch: usize },

    #[error("depth overflow: {cells} cells requested, budget is {budget}")]
    DepthOverflow { cells: u128, budget: usize },

    #[error("depth mismatch: {0}")]
    DepthMismatch(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate candidate: open set has empty interior")]
    DegenerateCandidate,

    #[error("cover failure near {point:?}: rectangles shrank below {min_size:e}")]
    CoverFailure { point: Vec<f64>, min_size: f64 },

    #[error("symbol is not admissible: {0}")]
    NotAdmissible(String),

    #[error("no admissible symbol: {0}")]
    MissingSymbol(String),

    #[error("attractor differs from the ambient box (self-similarity defect {defect:e} > spacing {spacing:e})")]
    AttractorNotBox { defect: f64, spacing: f64 },

    #[error("operation requires uniform (Hutchinson) weights")]
    NonUniformWeights,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
