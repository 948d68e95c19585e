use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Capacity(String),

    #[error("{0}")]
    Verification(String),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// Stable exit codes: 2 usage, 3 capacity, 4 verification, 1 anything else.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Io { .. } | CliError::Other(_) => 1,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<tmerge::CircuitError> for CliError {
    fn from(e: tmerge::CircuitError) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<tmerge::DocumentError> for CliError {
    fn from(e: tmerge::DocumentError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<tmerge::oracle::OracleError> for CliError {
    fn from(e: tmerge::oracle::OracleError) -> Self {
        match e {
            tmerge::oracle::OracleError::Capacity { .. } => CliError::Capacity(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<tmerge::benchgen::GenError> for CliError {
    fn from(e: tmerge::benchgen::GenError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<tmerge::estimate::EstimateError> for CliError {
    fn from(e: tmerge::estimate::EstimateError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<tmerge::report::CompareError> for CliError {
    fn from(e: tmerge::report::CompareError) -> Self {
        match e {
            tmerge::report::CompareError::Baseline(b) => CliError::Usage(b.to_string()),
            tmerge::report::CompareError::Circuit(c) => c.into(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Other(format!("csv: {e}"))
    }
}
