use std::fmt;
use std::path::PathBuf;

/// A single violated configuration constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.constraint)
    }
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The consumption jump left the economically meaningful region.
    #[error("model validity error: {0}")]
    ModelValidity(String),

    #[error("agent {agent} at step {step}: {source}")]
    Agent {
        agent: usize,
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {}", join(.0))]
    Config(Vec<Violation>),

    #[error("failed to parse configuration: {0}")]
    Parse(String),

    #[error("insufficient data: need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("accumulator contract violated: {0}")]
    Contract(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
