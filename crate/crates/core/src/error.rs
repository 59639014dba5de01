use std::fmt;

use thiserror::Error;

/// Single instance-level violation found by [`crate::instance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A fragile edge is also listed among the fixed edges.
    Overlap { edge: (usize, usize) },
    /// Node index outside `[0, n)`.
    Index { what: String, index: usize, n: usize },
    /// Damping outside `(0, 1]`.
    DampingRange(f64),
    /// The same ordered pair appears twice in one edge list.
    DuplicateEdge { list: &'static str, edge: (usize, usize) },
    /// `n` must be positive.
    EmptyGraph,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Overlap { edge } => write!(
                f,
                "OverlapError: fragile edge ({}, {}) is also a fixed edge",
                edge.0, edge.1
            ),
            Violation::Index { what, index, n } => {
                write!(f, "IndexError: {what} index {index} out of range for n = {n}")
            }
            Violation::DampingRange(c) => {
                write!(f, "DampingRangeError: damping {c} is not in (0, 1]")
            }
            Violation::DuplicateEdge { list, edge } => write!(
                f,
                "DuplicateEdgeError: ({}, {}) listed twice in {list}",
                edge.0, edge.1
            ),
            Violation::EmptyGraph => write!(f, "IndexError: node count must be positive"),
        }
    }
}

/// All violations of a raw instance, in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidInstance(pub Vec<Violation>);

impl InvalidInstance {
    pub fn has_overlap(&self) -> bool {
        self.0.iter().any(|v| matches!(v, Violation::Overlap { .. }))
    }
}

impl fmt::Display for InvalidInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for InvalidInstance {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Invalid(#[from] InvalidInstance),

    #[error("DimensionMismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("TooLargeToEnumerate: {count} free binaries exceeds the limit of {limit}")]
    TooLargeToEnumerate { count: usize, limit: usize },

    #[error("InfeasibleSpec: {0}")]
    InfeasibleSpec(String),

    #[error("ParseError: {0}")]
    Parse(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("SingularSystem: target is unreachable from some node (pivot {pivot:e})")]
    SingularSystem { pivot: f64 },

    #[error("NoConvergence: power iteration residual {residual:e} after {iters} iterations")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("NonConvergence: policy iteration exceeded {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    #[error("IndexError: fragile edge id {id} out of range for |Z| = {z}")]
    EdgeId { id: usize, z: usize },

    #[error("OverlapError: fragile edge {0} is both forced on and forced off")]
    ForcedOverlap(usize),

    #[error("UnsupportedDamping: the oracle requires damping < 1 (got {0})")]
    UnsupportedDamping(f64),

    #[error("LTooLarge: L = {l} exceeds fr(incumbent) = {fr}")]
    LTooLarge { l: f64, fr: f64 },

    #[error("InvalidOrdering: {0}")]
    InvalidOrdering(String),

    #[error("Infeasible: no selection satisfies the constraints")]
    Infeasible,

    #[error("Stalled: incumbent {incumbent} recurred with gap {gap:e}")]
    Stalled { incumbent: String, gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
