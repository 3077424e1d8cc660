use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty class: {0}")]
    EmptyClass(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("positive point {pos} coincides with negative point {neg}; sets are not separated")]
    CoincidentAcrossClasses { pos: usize, neg: usize },
    #[error("{name} must be strictly positive (got {value})")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("no hyperplane found for ordered point {index} after {attempts} attempts; violated: {violated:?}")]
    NoHyperplaneFound {
        index: usize,
        attempts: u64,
        violated: Vec<usize>,
    },
    #[error("invalid layer at node {index}: {reason}")]
    InvalidLayer { index: usize, reason: String },
    #[error("inconsistent assignment: {0}")]
    InconsistentAssignment(String),
    #[error("numeric overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid case parameters: {0}")]
    InvalidCaseParameters(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("invalid radii: {0}")]
    InvalidRadii(String),
    #[error("required width {width:.3e} exceeds cap {cap}")]
    WidthTooLarge { width: f64, cap: u64 },
    #[error("invalid coordinate subset: {0}")]
    InvalidSubset(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed dataset file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
