use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {coords:?} lies outside the model region")]
    OutsideRegion { coords: Vec<f64> },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("causal diamond is clipped by the slab boundary; use a Monte-Carlo volume")]
    ClippedDiamond,

    #[error("no closed form for this quantity on {0}; use the densified oracle")]
    NoClosedForm(&'static str),

    #[error("relation is not a strict partial order: cycle through ids {cycle:?}")]
    NotPartialOrder { cycle: Vec<u64> },

    #[error("invalid ordered measure space: {0}")]
    InvalidSpace(String),

    #[error("sprinkle drew zero points")]
    EmptySprinkle,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("density too low: no admissible chain between the endpoints")]
    InsufficientDensity,

    #[error("set must be non-empty: {0}")]
    EmptySet(&'static str),

    #[error("invalid cover element {index}: {reason}")]
    InvalidCover { index: usize, reason: String },

    #[error("region cannot be tiled: {0}")]
    NonTileable(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("pair references unknown point id {0}")]
    DanglingId(u64),

    #[error("duplicate point id {0}")]
    DuplicateId(u64),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("stage `{stage}` requires `{missing}` to run first")]
    MissingStage { stage: String, missing: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("writing {path}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("reading {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
