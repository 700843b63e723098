use thiserror::Error;

/// Errors raised while building networks, evolving states or parsing inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("unsupported hypercube link count {0}; expected 1 or 2")]
    UnsupportedLinks(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {to} is unreachable from vertex {from}")]
    Unreachable { from: usize, to: usize },

    #[error("graph is not in the column family: {0}")]
    NotInFamily(String),

    #[error("compensating fields are undefined for a chain of {0} sites; need at least 3")]
    UndefinedFields(usize),

    #[error("full Hilbert space oracle is limited to {limit} sites, got {sites}")]
    OracleSize { sites: usize, limit: usize },

    #[error("matrix is not symmetric: entry ({row}, {col}) deviates by {deviation:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("state is not normalized: total probability {0}")]
    NotNormalized(f64),

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad user input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Numerical(_) | Error::NotSymmetric { .. } | Error::Degenerate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
