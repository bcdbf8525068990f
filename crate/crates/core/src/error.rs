use thiserror::Error;

/// Errors raised by graph analytics, prioritization, and planning.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),

    /// An operation that requires an acyclic digraph received a cyclic one.
    #[error("directed graph contains a cycle")]
    Cyclic,

    /// Adjacent vertices share a priority, so the edge has no orientation.
    #[error("vertices {0} and {1} are adjacent but share priority {2}")]
    InvalidPriority(usize, usize, usize),

    #[error("invalid coloring: {0}")]
    InvalidColoring(String),

    /// An exhaustive routine was asked to handle more vertices than it allows.
    #[error("graph with {n} vertices exceeds the exhaustive-search limit of {max}")]
    Budget { n: usize, max: usize },

    /// Agents disagreed on shared data that must be identical.
    #[error("inconsistent agent data: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
