use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid horizon {0}: the prime table needs at least 2")]
    InvalidHorizon(u64),

    #[error("horizon {requested} exceeds the supported bound {bound}")]
    Resource { requested: u64, bound: u64 },

    #[error("index {requested} is beyond the available horizon {horizon}")]
    HorizonExceeded { requested: u64, horizon: u64 },

    #[error("modulus must be positive")]
    InvalidModulus,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{b}/{q} is not in lowest terms (gcd = {gcd})")]
    NonPrimitive { b: u64, q: u64, gcd: u64 },

    #[error("invalid rigidity scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid phi: {0}")]
    InvalidPhi(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("exponent {exponent} leaves the exact window of the truncated shift (slack {slack})")]
    WindowExceeded { exponent: u128, slack: u128 },

    #[error("unsupported decomposition: {0}")]
    UnsupportedDecomposition(String),

    #[error("quadrature grid {grid} aliases a window needing at least {needed} points")]
    Aliasing { grid: usize, needed: usize },

    #[error("scheme {0} requires a prime table")]
    MissingTable(&'static str),

    #[error("integer overflow evaluating {0}")]
    Overflow(String),

    #[error("spec error at {path}: {message}")]
    Spec { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
