use std::path::PathBuf;

use thiserror::Error;

use crate::scheme::StepError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("non-conforming mesh: {0}")]
    Conformity(String),

    #[error("shape regularity violated: cell {cell} has condition number {condition:.4} (cap {cap})")]
    ShapeRegularity { cell: usize, condition: f64, cap: f64 },

    #[error("unsupported quadrature degree {0}")]
    UnsupportedDegree(u32),

    #[error("unsupported norm exponent {0}")]
    UnsupportedExponent(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("face {0} is an exterior face and has no outer trace")]
    ExteriorFace(usize),

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("linear solver failed: {0}")]
    LinearSolve(String),

    #[error(transparent)]
    Step(#[from] Box<StepError>),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<StepError> for Error {
    fn from(e: StepError) -> Self {
        Error::Step(Box::new(e))
    }
}
