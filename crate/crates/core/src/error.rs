use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("half-space {index}: {reason}")]
    InvalidHalfSpace { index: usize, reason: String },

    #[error("half-space {index} is redundant (not a facet)")]
    RedundantHalfSpace { index: usize },

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("polytope has empty interior")]
    EmptyInterior,

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point lies outside the obstacle")]
    OutsideObstacle,

    #[error("sample {index} lies inside an obstacle")]
    SampleInCollision { index: usize },

    #[error("part {part}: {source}")]
    Part {
        part: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("obstacle {index}: {source}")]
    Obstacle {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn in_part(self, part: usize) -> Self {
        Error::Part {
            part,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
