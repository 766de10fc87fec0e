use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frame must have between 2 and 16 hypotheses, got {0}")]
    FrameSize(usize),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("empty label")]
    EmptyLabel,

    #[error("evidence is defined on a different frame")]
    FrameMismatch,

    #[error("invalid belief distribution: {0}")]
    InvalidDistribution(String),

    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("complete conflict: combined evidence leaves no mass on the frame")]
    CompleteConflict,

    #[error("no effective evidence: {0}")]
    NoEffectiveEvidence(String),

    #[error("unknown grade `{grade}` for criterion `{criterion}`")]
    UnknownGrade { criterion: String, grade: String },

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),

    #[error("unknown criterion `{0}`")]
    UnknownCriterion(String),

    #[error("criterion `{criterion}`: no history for hypothesis `{hypothesis}`")]
    EmptyHypothesisRow {
        criterion: String,
        hypothesis: String,
    },

    #[error("criterion `{criterion}`: grade `{grade}` never observed in history")]
    UnobservedGrade { criterion: String, grade: String },

    #[error("no usable review history for expert `{0}`")]
    NoHistory(String),

    #[error("no reliability available for expert `{expert}` on project `{project}`")]
    MissingReliability { project: String, expert: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("project `{project_id}`: {source}")]
    InProject {
        project_id: String,
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    /// Failures of the combination itself rather than of the inputs.
    pub fn is_computation(&self) -> bool {
        match self {
            Error::CompleteConflict | Error::NoEffectiveEvidence(_) => true,
            Error::InProject { source, .. } => source.is_computation(),
            _ => false,
        }
    }

    pub(crate) fn in_project(self, project_id: &str) -> Self {
        Error::InProject {
            project_id: project_id.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}
