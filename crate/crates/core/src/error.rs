use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the library.
///
/// Variants split into input-validation problems and numerical problems,
/// see [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: requested {requested} monomials, ordering holds {capacity}")]
    Capacity { requested: usize, capacity: usize },

    #[error("duplicate atoms at indices {first} and {second}")]
    DuplicateAtoms { first: usize, second: usize },

    #[error("non-positive weight {weight} at index {index}")]
    NonPositiveWeight { index: usize, weight: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {found}: operation requires d = {expected}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("kernel vanishes at the evaluation point (Christoffel function is infinite)")]
    VanishingKernel,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("closeness epsilon {epsilon} >= 1: two-measure bounds do not apply")]
    NotClose { epsilon: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

impl Error {
    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::VanishingKernel
                | Error::Singular(_)
                | Error::NotClose { .. }
                | Error::Degenerate(_)
        )
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Capacity { .. } => "capacity",
            Error::DuplicateAtoms { .. } => "duplicate-atoms",
            Error::NonPositiveWeight { .. } => "non-positive-weight",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::UnsupportedDimension { .. } => "unsupported-dimension",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::VanishingKernel => "vanishing-kernel",
            Error::Singular(_) => "singular",
            Error::NotClose { .. } => "not-close",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
        }
    }
}
