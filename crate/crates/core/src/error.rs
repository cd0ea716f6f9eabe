use crate::geometry::Side;
use crate::modulus::ExtremalMetric;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid-argument: {0}")]
    InvalidArgument(String),
    #[error("invalid-tiling: {0}")]
    InvalidTiling(String),
    #[error("parse error in field `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph-disconnected between {from:?} and {to:?}")]
    GraphDisconnected { from: Side, to: Side },
    #[error("no-convergence after {columns} columns (gap {})", .partial.duality_gap)]
    NoConvergence {
        partial: Box<ExtremalMetric>,
        columns: usize,
    },
    #[error("breakpoint: level {t} coincides with a disk potential value")]
    Breakpoint { t: f64 },
    #[error("topology error at level {t}{}: {detail}", .disk.map(|d| format!(" (disk {d})")).unwrap_or_default())]
    Topology {
        t: f64,
        disk: Option<u64>,
        detail: String,
    },
    #[error("fewer-rings: only {achieved} of {requested} annuli fit")]
    FewerRings { achieved: usize, requested: usize },
    #[error("mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
