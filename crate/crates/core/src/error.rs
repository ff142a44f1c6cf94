use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("vertex count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("matrix is not a realizable effective-resistance matrix: {0}")]
    NotRealizable(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no candidate edges: the graph is complete")]
    NoCandidates,

    #[error("n = {n} exceeds the exhaustive-search cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("no connected sample after {tries} tries")]
    GenerationFailed { tries: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
