use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter invariant does not hold. `invariant` is a stable
    /// kebab-case name such as `proportions-sum` or `nonpositive-nu`.
    #[error("invalid parameters ({invariant}): {message}")]
    Invalid {
        invariant: &'static str,
        message: String,
    },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("singular best-response system for group {group} (condition estimate {condition:.3e})")]
    SingularSystem { group: usize, condition: f64 },

    #[error("non-finite value at node {node} during {stage}")]
    NonFinite { stage: &'static str, node: usize },

    #[error("unknown preset `{0}` (expected one of: base, exp2, exp3, exp4, exp5)")]
    UnknownPreset(String),

    #[error("solution is empty")]
    EmptySolution,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(invariant: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            invariant,
            message: message.into(),
        }
    }

    /// Name of the violated invariant, if this is a validation error.
    pub fn invariant(&self) -> Option<&'static str> {
        match self {
            Error::Invalid { invariant, .. } => Some(invariant),
            _ => None,
        }
    }
}
