use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid header: {0}")]
    Header(String),

    #[error("unsupported datatype: {0}")]
    UnsupportedDatatype(String),

    #[error("payload length mismatch: expected {expected} values, found {found}")]
    PayloadMismatch { expected: usize, found: usize },

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("point {point:?} is outside the volume bounds")]
    OutOfBounds { point: [f64; 3] },

    #[error("seed {point:?} is outside the volume bounds")]
    SeedOutOfBounds { point: [f64; 3] },

    #[error("at least one seed point is required")]
    NoSeeds,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("ray {ray} is already fixed at sample {existing}, cannot fix it at {requested}")]
    ConflictingConstraint {
        ray: usize,
        existing: usize,
        requested: usize,
    },

    #[error("seed constraints cannot all be honored under the smoothness limit")]
    InfeasibleConstraints,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("phantom object does not fit inside the volume: {0}")]
    PhantomOutside(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable snake_case identifier used in machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Header(_) => "invalid_header",
            Error::UnsupportedDatatype(_) => "unsupported_datatype",
            Error::PayloadMismatch { .. } => "payload_length_mismatch",
            Error::InvalidVolume(_) => "invalid_volume",
            Error::OutOfBounds { .. } => "out_of_bounds",
            Error::SeedOutOfBounds { .. } => "seed_out_of_bounds",
            Error::NoSeeds => "no_seeds",
            Error::InvalidParams(_) => "invalid_params",
            Error::ConflictingConstraint { .. } => "conflicting_constraint",
            Error::InfeasibleConstraints => "infeasible_constraints",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::PhantomOutside(_) => "phantom_outside",
            Error::Empty(_) => "empty_input",
            Error::MalformedPartition(_) => "malformed_partition",
            Error::InvalidNetwork(_) => "invalid_network",
            Error::Json(_) => "malformed_json",
            Error::Internal(_) => "internal",
        }
    }
}
