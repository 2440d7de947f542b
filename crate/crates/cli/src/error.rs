use heom_core::HeomError;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad configuration or arguments; exit code 2.
    Config,
    /// Numerical or I/O failure while running; exit code 3.
    Run,
}

#[derive(Debug, Error)]
#[error("{stage}: {msg}")]
pub struct CliError {
    pub kind: ErrorKind,
    /// Stage that failed, e.g. `config`, `build`, `task dos`.
    pub stage: String,
    pub msg: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            stage: "config".into(),
            msg: msg.into(),
        }
    }

    pub fn run(stage: impl Into<String>, msg: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Run,
            stage: stage.into(),
            msg: msg.into(),
        }
    }

    /// Engine errors caused by the inputs count as configuration errors.
    pub fn from_engine(stage: impl Into<String>, e: HeomError) -> Self {
        let kind = match e {
            HeomError::Parameter(_)
            | HeomError::Singularity(_)
            | HeomError::Dimension(_)
            | HeomError::Usage(_)
            | HeomError::NotFound(_)
            | HeomError::SpaceTooLarge { .. } => ErrorKind::Config,
            HeomError::Stiff { .. } | HeomError::Multiplicity | HeomError::Solver { .. } | HeomError::Decode(_) => {
                ErrorKind::Run
            }
        };
        Self {
            kind,
            stage: stage.into(),
            msg: e.to_string(),
        }
    }

    pub fn io(stage: impl Into<String>, e: std::io::Error) -> Self {
        Self::run(stage, format!("I/O error: {e}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Run => 3,
        }
    }
}
