use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config: {0}")]
    Config(String),

    #[error("grid point {index}: {source}")]
    Solver {
        index: usize,
        #[source]
        source: compton_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl SweepError {
    /// Process exit code: 2 config, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Config(_) => 2,
            SweepError::Solver { .. } => 3,
            SweepError::Io { .. } | SweepError::Serialize(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SweepError::Io { path: path.into(), source }
    }

    /// Attaches a grid-point index; invalid inputs map to config errors.
    pub fn from_core(index: usize, source: compton_core::Error) -> Self {
        match source {
            compton_core::Error::Config(msg) | compton_core::Error::Domain(msg) => SweepError::Config(format!("grid point {index}: {msg}")),
            source => SweepError::Solver { index, source },
        }
    }

    pub(crate) fn at(index: usize) -> impl FnOnce(compton_core::Error) -> Self {
        move |source| Self::from_core(index, source)
    }
}

pub type Result<T> = std::result::Result<T, SweepError>;
