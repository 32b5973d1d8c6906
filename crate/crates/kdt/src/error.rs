use thiserror::Error;

/// Crate-wide error type. `exit_code` maps variants onto the CLI exit-code
/// contract: 2 invalid input, 3 validation failure, 4 internal consistency.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFiniteCoordinate { x: f64, y: f64 },

    #[error("duplicate point: input indices {first} and {second} both are ({x}, {y})")]
    DuplicatePoint {
        first: usize,
        second: usize,
        x: f64,
        y: f64,
    },

    #[error("point ({x}, {y}) coincides with alive vertex {vertex}")]
    CoincidentPoint { vertex: u32, x: f64, y: f64 },

    #[error("degenerate triangle: vertices are collinear")]
    DegenerateTriangle,

    #[error("triangle vertices are not in counter-clockwise order")]
    NotCounterClockwise,

    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("all input points are collinear")]
    CollinearInput,

    #[error("empty input")]
    EmptyInput,

    #[error("vertex {0} is unknown or not alive")]
    InvalidVertex(u32),

    #[error("deleting vertex {0} would leave a degenerate point set")]
    DegenerateResult(u32),

    #[error("point ({x}, {y}) lies outside the root square")]
    OutOfDomain { x: f64, y: f64 },

    #[error("vertex {vertex} is not owned by block {from}")]
    InvalidTransfer { vertex: u32, from: u32 },

    #[error("transfer destination {to} does not match the point's block {actual}")]
    WrongDestination { to: u32, actual: u32 },

    #[error("N = {n} requires {need} points, got {got}")]
    InvalidN { n: usize, need: usize, got: usize },

    #[error("quad-tree split depth cap {cap} exceeded: more than threshold coincident or near-coincident points")]
    DuplicateOverflow { cap: u32 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("oracle accepts at most {cap} points, got {got}")]
    OracleTooLarge { cap: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid dump: {0}")]
    InvalidDump(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("validation failed: {violations} Delaunay violation(s), {structural} structural problem(s)")]
    ValidationFailed { violations: usize, structural: usize },

    #[error("oracle mismatch: triangulation disagrees with brute-force reference")]
    OracleMismatch,

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ValidationFailed { .. } | Error::OracleMismatch => 3,
            Error::Internal(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
