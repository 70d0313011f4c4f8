use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("fit did not converge: {0}")]
    NonConvergence(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<hgld::Error> for CliError {
    fn from(e: hgld::Error) -> Self {
        use hgld::Error as E;
        match e {
            E::InvalidParams(_)
            | E::ProbabilityOutOfRange(_)
            | E::DegenerateSample(_)
            | E::InsufficientData(_)
            | E::RankDeficient
            | E::InvalidArgument(_) => CliError::Input(e.to_string()),
            E::MomentDoesNotExist { .. }
            | E::NoAdmissibleCandidate(_)
            | E::Separation
            | E::NonConvergence(_)
            | E::TooManyReplicateFailures { .. } => CliError::NonConvergence(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
