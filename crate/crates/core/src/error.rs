use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("edge index {index} out of range for a graph with {num_edges} edges")]
    EdgeOutOfRange { index: usize, num_edges: usize },

    #[error("vertex {vertex} out of range for a graph with {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("edge set is not a spanning tree")]
    NotSpanningTree,

    #[error("edge set is not a two-tree forest separating the anchors")]
    NotTwoForest,

    #[error("invalid family parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid free-edge choice at step {step}: edge {edge} is not free")]
    InvalidChoice { step: usize, edge: usize },

    #[error("malformed ladder structure: {0}")]
    MalformedStructure(String),

    #[error("cost matrix dimension {found} does not match edge count {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid conflict pair ({0}, {1})")]
    InvalidConflict(usize, usize),

    #[error("instance is not adjacent-only: entry ({0}, {1}) is nonzero on non-adjacent edges")]
    NotAdjacentOnly(usize, usize),

    #[error("conflict pair ({0}, {1}) is not adjacent")]
    ConflictNotAdjacent(usize, usize),

    #[error("problem kind {kind} is not supported by {method}")]
    UnsupportedKind { kind: String, method: &'static str },

    #[error("enumeration guard exceeded: {estimated} spanning trees > limit {limit}")]
    GuardExceeded { estimated: String, limit: u64 },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("matrix is not permuted doubly graded")]
    NotDoublyGraded,

    #[error("matrix is not permuted row graded")]
    NotRowGraded,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid base system: {0}")]
    InvalidBaseSystem(String),

    #[error("base system is not a matroid")]
    NotMatroid,

    #[error("set {0:?} is not a base")]
    NotABase(Vec<usize>),

    #[error("invalid exchange witness: {0}")]
    InvalidWitness(String),

    #[error("malformed 3-SAT instance: {0}")]
    MalformedFormula(String),

    #[error("tree violates {0} conflict pair(s)")]
    InfeasibleTree(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid instance file: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
