use thiserror::Error;

/// Errors raised by set operations, iterations and scenario plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergent { what: String, iterations: u64 },

    #[error("set is unbounded in the requested direction")]
    Unbounded,

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("infeasible constraint system: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation failed: {0}")]
    ValidationFailure(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("cosine undefined for a zero vector")]
    ZeroVector,

    #[error("cosine {0} is not positive")]
    NonpositiveCosine(f64),

    #[error("vectors are linearly dependent")]
    LinearlyDependent,

    #[error("no positive delta on the sampled region (smallest rung {smallest_rung:e} fails)")]
    NoPositiveDelta { smallest_rung: f64 },

    #[error("annulus membership violated: |c| = {norm} outside [{lo}, {hi}]")]
    AnnulusViolated { norm: f64, lo: f64, hi: f64 },

    #[error("schedule stalled in block {block} after {steps} steps")]
    ScheduleStall { block: usize, steps: u64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn non_convergent(what: impl Into<String>, iterations: u64) -> Self {
        Error::NonConvergent {
            what: what.into(),
            iterations,
        }
    }

    /// Whether the error comes from a numerical routine failing to settle.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergent { .. }
                | Error::ScheduleStall { .. }
                | Error::NoPositiveDelta { .. }
        )
    }

    /// Whether the error is caused by malformed input or configuration.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::UnknownScenario(_)
                | Error::InvalidSet(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
        )
    }
}
