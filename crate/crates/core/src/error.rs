use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight {weight} for atom {index}: weights must be finite and nonnegative")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("sampling from a measure with zero mass")]
    EmptyMeasure,

    #[error("subtracted measure exceeds the base measure at atom {index} ({sub} > {base})")]
    ViolatedDomination { index: usize, sub: f64, base: f64 },

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    #[error("support cap exceeded: {required} atoms required, cap is {cap}")]
    SupportCapExceeded { required: usize, cap: usize },

    #[error("insufficient data: {available} usable points, at least {required} needed")]
    InsufficientData { available: usize, required: usize },

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid scenario at `{key}`: {message}")]
    InvalidScenario { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
