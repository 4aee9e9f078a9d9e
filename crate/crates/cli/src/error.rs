use lplab_core::LabError;

/// Exit codes: 0 pass, 1 invariant failure, 2 config error, 3 convergence.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", location(origin, *line))]
    Config {
        origin: String,
        line: Option<usize>,
        message: String,
    },
    #[error("contract violated: {0}")]
    Contract(LabError),
    #[error("numerical convergence failed: {0}")]
    Convergence(LabError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn location(source: &str, line: Option<usize>) -> String {
    match line {
        Some(l) => format!("{source}:{l}"),
        None => source.to_string(),
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        if e.is_convergence() {
            CliError::Convergence(e)
        } else {
            CliError::Contract(e)
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Contract(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}
