use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // graph construction
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },
    #[error("edge ({u}, {v}) has nonpositive weight {weight}")]
    NonpositiveWeight { u: usize, v: usize, weight: f64 },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) listed twice")]
    DuplicateEdge(usize, usize),
    #[error("a graph needs at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("{family} level {level} exceeds the configured maximum {max}")]
    LevelTooLarge { family: String, level: u32, max: u32 },
    #[error("{family} level {level} is not defined: {reason}")]
    InvalidLevel {
        family: String,
        level: u32,
        reason: &'static str,
    },
    #[error("vertex set is empty")]
    EmptySet,
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("vertex sets overlap at vertex {0}")]
    OverlappingSets(usize),

    // numerics
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("{what}: size {size} exceeds budget {budget}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        budget: usize,
    },
    #[error("function has {got} values, graph has {expected} vertices")]
    MissingValue { expected: usize, got: usize },
    #[error("source and target are the same vertex {0}")]
    SameVertex(usize),
    #[error("horizon {horizon} exceeds cap {cap}")]
    HorizonTooLarge { horizon: usize, cap: usize },
    #[error("theta must be nonnegative, got {0}")]
    NegativeTheta(f64),

    // walks
    #[error("vertex {vertex} visited fewer than {needed} times")]
    NotReached { vertex: usize, needed: usize },
    #[error("trajectory was not retained")]
    TrajectoryNotRetained,
    #[error("walk did not cover the graph within {cap} steps")]
    CapExceeded { cap: u64 },

    // garsia
    #[error("psi overflowed on pair ({x}, {y})")]
    Overflow { x: usize, y: usize },
    #[error("volume lower bound fails at radius {radius}: ball volume {volume} < v(r) = {bound}")]
    VolumeBoundUnverified {
        radius: f64,
        volume: f64,
        bound: f64,
    },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    // experiments
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("censored fraction {fraction:.4} exceeds the {limit} limit")]
    ExcessiveCensoring { fraction: f64, limit: f64 },
    #[error("need at least {needed} levels, got {got}")]
    InsufficientLevels { needed: usize, got: usize },

    // configuration and io
    #[error("parse error: {0}")]
    Parse(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_)
            | Error::Range(_)
            | Error::UnknownKey(_)
            | Error::Schema(_)
            | Error::LevelTooLarge { .. }
            | Error::InvalidLevel { .. } => 2,
            Error::BudgetExceeded { .. }
            | Error::HorizonTooLarge { .. }
            | Error::ExcessiveCensoring { .. }
            | Error::CapExceeded { .. } => 3,
            Error::InvariantViolation(_) => 4,
            _ => 1,
        }
    }
}
