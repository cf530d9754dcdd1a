use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between parsing a configuration and
/// emitting a benchmark report.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is outside its supported range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Polynomial order outside the supported range.
    #[error("polynomial order {order} is unsupported (must be between {min} and {max})")]
    OrderRange { order: usize, min: usize, max: usize },

    /// Two interpolation nodes coincide, so cardinal polynomials are undefined.
    #[error("interpolation nodes {i} and {j} coincide at {value}")]
    CoincidentNodes { i: usize, j: usize, value: f64 },

    /// A tensor-product index was outside the element.
    #[error("local {axis}-index {index} is out of range for order {order} (valid: 0..={order})")]
    IndexRange {
        axis: char,
        index: usize,
        order: usize,
    },

    /// An element's geometric map is degenerate or inverted.
    #[error("element {element} has non-positive Jacobian determinant {det}")]
    InvertedElement { element: usize, det: f64 },

    /// More partitions were requested than there are elements.
    #[error("cannot split {elements} elements into {requested} partitions")]
    PartitionCount { requested: usize, elements: usize },

    /// A state field violates a physical-validity invariant.
    #[error("invalid state at node {node}: {quantity} = {value}")]
    InvalidState {
        node: usize,
        quantity: &'static str,
        value: f64,
    },

    /// A kernel produced a non-finite value.
    #[error("non-finite residual contribution in element {element}")]
    NumericalFault { element: usize },

    /// The time integrator left the valid state manifold.
    #[error("unstable at step {step}: {detail}; reduce dt")]
    Unstable { step: usize, detail: String },

    /// Throughput is undefined for a zero runtime.
    #[error("cannot compute throughput for a zero runtime")]
    ZeroRuntime,

    /// No element grid gets close enough to a requested node count.
    #[error(
        "no element grid within {tolerance_pct}% of {target} nodes \
         (nearest candidate: {nearest_grid:?} with {nearest_nodes} nodes)"
    )]
    NodeTarget {
        target: usize,
        tolerance_pct: u32,
        nearest_grid: [usize; 3],
        nearest_nodes: usize,
    },

    /// The in-sweep cross-variant correctness gate failed.
    #[error("correctness gate failed: {0}")]
    CorrectnessGate(String),

    /// A dump or report file could not be read or written.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A dump file does not match the expected layout.
    #[error("malformed file {path}: {detail}")]
    FileFormat { path: String, detail: String },

    /// JSON (de)serialization failure in a report or dump header.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
