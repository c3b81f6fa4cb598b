use std::path::PathBuf;

use crate::lattice::Site;

/// Errors produced by planning, simulation and I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid lattice dimensions {rows}x{cols}")]
    InvalidLattice { rows: usize, cols: usize },

    #[error("site ({}, {}) is outside the {rows}x{cols} lattice", .site.row, .site.col)]
    SiteOutOfRange { site: Site, rows: usize, cols: usize },

    #[error("pattern {pattern} does not fit in a {rows}x{cols} lattice")]
    PatternDoesNotFit { pattern: String, rows: usize, cols: usize },

    #[error("bad pattern spec `{0}` (expected square:K, rect:RxC, bitmap:<path> or grid:<rows>)")]
    BadPatternSpec(String),

    #[error("target pattern is empty")]
    EmptyTarget,

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(crate::plan::Violation),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("plan leaves {vacant} target sites vacant")]
    Incomplete { vacant: usize },

    #[error("oracle gave up: {0}")]
    OracleLimit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
