use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: loop at vertex {vertex}")]
    Loop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {{{u},{v}}}")]
    ParallelEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: negative weight {weight}")]
    NegativeWeight { line: usize, weight: String },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge {{{u},{v}}} is not in the graph")]
    EdgeAbsent { u: usize, v: usize },
    #[error("deleting edge {{{u},{v}}} disconnects the graph")]
    DeletionDisconnects { u: usize, v: usize },
    #[error("weighting has {got} entries, graph has {expected} edges")]
    WeightingLength { expected: usize, got: usize },
    #[error("edge plan mismatch: {0}")]
    PlanMismatch(String),
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("invalid index set: {0}")]
    InvalidIndices(String),
    #[error("not a semimetric: {0}")]
    NotSemimetric(String),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("size {n} exceeds cap {cap}")]
    OverCap { n: usize, cap: usize },
    #[error("subset is not a split of the metric")]
    NotASplit,
    #[error("shift {x} is below minus the isolation index {alpha}")]
    ShiftBelowIsolation { x: String, alpha: String },
    #[error("edge {{{u},{v}}} would get negative weight {weight}")]
    NegativeResultWeight { u: usize, v: usize, weight: String },
    #[error("metric is not totally decomposable")]
    NotTotallyDecomposable,
    #[error("decomposition invariant violated: {0}")]
    DecompositionInvariant(String),
    #[error("invalid norm parameter p = {0}; need p >= 1")]
    InvalidNorm(String),
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
