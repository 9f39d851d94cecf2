use core::fmt;

/// Failure to construct a scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildError {
    /// Randomized construction did not meet its size conditions in time.
    RetryLimitExceeded { stage: &'static str, attempts: u32 },
    /// Hierarchy depth below 2.
    InvalidDepth(u32),
}

impl BuildError {
    pub fn code(&self) -> &'static str {
        match self {
            BuildError::RetryLimitExceeded { .. } => "retry-limit-exceeded",
            BuildError::InvalidDepth(_) => "invalid-depth",
        }
    }
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::RetryLimitExceeded { stage, attempts } => {
                write!(f, "{stage}: no valid draw after {attempts} attempts")
            }
            BuildError::InvalidDepth(k) => write!(f, "hierarchy depth must be at least 2, got {k}"),
        }
    }
}

impl core::error::Error for BuildError {}
