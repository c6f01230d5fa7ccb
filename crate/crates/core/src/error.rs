use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: &'static str,
    },

    #[error("no index satisfying the construction conditions up to horizon {horizon}")]
    NoValidIndex { horizon: usize },

    #[error("index {n} outside the valid range [{min}, {max}]")]
    IndexOutOfRange { n: usize, min: usize, max: usize },

    #[error("depth {depth} below the minimum {min}")]
    DepthTooSmall { depth: usize, min: usize },

    #[error("depth {depth} exceeds the index cap {cap}")]
    DepthExceedsCap { depth: usize, cap: usize },

    #[error("result owned by piece {label} is within two pieces of the closure at depth {depth}")]
    TruncationUnsafe { label: usize, depth: usize },

    #[error("{what} = {value} outside its domain")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
