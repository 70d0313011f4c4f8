use thiserror::Error;

/// Errors produced by estimation and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("moment of order {k} does not exist for shape parameters ({lambda3}, {lambda4})")]
    MomentDoesNotExist { k: u32, lambda3: f64, lambda4: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no admissible starting candidate among {0} evaluated")]
    NoAdmissibleCandidate(usize),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("complete or quasi-complete separation in the binary response")]
    Separation,

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("{failed} of {total} replicate fits failed")]
    TooManyReplicateFailures { failed: usize, total: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
