//! Error type shared by every module of the core crate.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// The request itself is malformed (bad query, bad configuration).
    Usage,
    /// The model or dataset handed in violates its invariants.
    Data,
    /// A numeric routine could not produce a result.
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The structural edges contain a directed cycle through `node`.
    Cycle { node: String },
    /// Both members of a mutually exclusive spillover pair are nonzero.
    Simultaneity { first: String, second: String },
    UnknownVariable(String),
    DuplicateVariable(String),
    /// Any other model-level invariant violation.
    InvalidModel(String),
    /// A path or separation query that makes no sense (x = y, x in the conditioning set, ...).
    DegenerateQuery(String),
    TooManyNodes { nodes: usize, cap: usize },
    /// `I - B` could not be inverted.
    Singularity,
    /// The two exposures are (numerically) perfectly correlated.
    Collinearity { rho: f64 },
    /// An exposure has zero implied variance.
    DegenerateExposure(String),
    EmptyData,
    InsufficientData { n: usize, required: usize },
    /// The design matrix lost rank at `column`.
    RankDeficiency { column: String },
    DimensionMismatch { expected: usize, found: usize },
    InvalidArgument(String),
    InvalidData(String),
    Config(String),
    /// A single Monte Carlo replicate failed.
    Replicate {
        replicate: u64,
        master_seed: u64,
        source: Box<Error>,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DegenerateQuery(_)
            | Error::TooManyNodes { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::Config(_) => ErrorClass::Usage,
            Error::Cycle { .. }
            | Error::Simultaneity { .. }
            | Error::UnknownVariable(_)
            | Error::DuplicateVariable(_)
            | Error::InvalidModel(_)
            | Error::EmptyData
            | Error::InsufficientData { .. }
            | Error::InvalidData(_) => ErrorClass::Data,
            Error::Singularity
            | Error::Collinearity { .. }
            | Error::DegenerateExposure(_)
            | Error::RankDeficiency { .. } => ErrorClass::Numeric,
            Error::Replicate { source, .. } => source.class(),
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Cycle { .. } => "cycle",
            Error::Simultaneity { .. } => "simultaneity",
            Error::UnknownVariable(_) => "unknown_variable",
            Error::DuplicateVariable(_) => "duplicate_variable",
            Error::InvalidModel(_) => "invalid_model",
            Error::DegenerateQuery(_) => "degenerate_query",
            Error::TooManyNodes { .. } => "too_many_nodes",
            Error::Singularity => "singularity",
            Error::Collinearity { .. } => "collinearity",
            Error::DegenerateExposure(_) => "degenerate_exposure",
            Error::EmptyData => "empty_data",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::RankDeficiency { .. } => "rank_deficiency",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidData(_) => "invalid_data",
            Error::Config(_) => "config",
            Error::Replicate { .. } => "replicate",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Cycle { node } => write!(f, "structural edges form a cycle through {node}"),
            Error::Simultaneity { first, second } => write!(
                f,
                "simultaneous spillover: {first} and {second} are both nonzero; at most one may be"
            ),
            Error::UnknownVariable(name) => write!(f, "unknown variable {name:?}"),
            Error::DuplicateVariable(name) => write!(f, "variable {name:?} declared twice"),
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::DegenerateQuery(msg) => write!(f, "degenerate query: {msg}"),
            Error::TooManyNodes { nodes, cap } => {
                write!(f, "model has {nodes} nodes, path enumeration is capped at {cap}")
            }
            Error::Singularity => write!(f, "I - B is numerically singular"),
            Error::Collinearity { rho } => {
                write!(f, "exposures are collinear (correlation {rho})")
            }
            Error::DegenerateExposure(name) => write!(f, "exposure {name} has zero variance"),
            Error::EmptyData => write!(f, "dataset is empty"),
            Error::InsufficientData { n, required } => write!(
                f,
                "{n} observations is too few; the regression needs more than {required}"
            ),
            Error::RankDeficiency { column } => {
                write!(f, "design matrix is rank deficient at column {column}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} weights, got {found}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidData(msg) => write!(f, "invalid data: {msg}"),
            Error::Config(msg) => write!(f, "invalid simulation config: {msg}"),
            Error::Replicate {
                replicate,
                master_seed,
                source,
            } => write!(
                f,
                "replicate {replicate} (master seed {master_seed}) failed: {source}"
            ),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::Replicate { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
