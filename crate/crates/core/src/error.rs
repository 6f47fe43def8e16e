use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a formula.
    #[error("domain error in `{field}`: {reason}")]
    Domain { field: String, reason: String },

    /// The number basis is too small for the requested state.
    #[error("truncation too small: dimension {dim} given, at least {required} required")]
    Truncation { dim: usize, required: usize },

    /// Population reached the last retained Fock level.
    #[error("truncation unhealthy: tail population {tail:e} exceeds {limit:e}; increase the dimension")]
    TruncationHealth { tail: f64, limit: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e}; increase the dimension or step count")]
    NormDrift { drift: f64, limit: f64 },

    #[error("step size {dt:e} s too large; must be below {max:e} s")]
    StepSize { dt: f64, max: f64 },

    #[error("not in free-fall regime: radiation force {force:e} N is not below 0.1·m·g = {limit:e} N")]
    NotFreeFall { force: f64, limit: f64 },

    #[error("constraints violated: {}", .0.join("; "))]
    Constraints(Vec<String>),

    /// Schema problems, each entry carrying a dotted field path.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("invalid hybrid state: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(field: &str, reason: impl Into<String>) -> Self {
        Error::Domain { field: field.to_string(), reason: reason.into() }
    }
}

/// Fails with a domain error unless `value` is finite and strictly positive.
pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(field, format!("must be finite and > 0, got {value:e}")))
    }
}
