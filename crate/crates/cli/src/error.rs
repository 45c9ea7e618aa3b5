use tanglebounds_core::Error;

/// Everything that ends a run, with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("verification failed: {0}")]
    Violation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn schema(path: &str, message: impl Into<String>) -> Self {
        CliError::Schema { path: path.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Violation(_) => 5,
            CliError::Io(_) | CliError::Internal(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let text = e.to_string();
        match e {
            Error::NonConvergence { .. } => CliError::NonConvergence(text),
            Error::PreconditionFailed { .. } | Error::NotFound(_) | Error::Incompatible { .. } | Error::UnsupportedSetting(_) => {
                CliError::Infeasible(text)
            }
            Error::InvalidSpec(_) | Error::InvalidRegion(_) | Error::DimensionMismatch { .. } | Error::InvalidComponent { .. } => {
                CliError::schema("mixture", text)
            }
            _ => CliError::Internal(text),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
