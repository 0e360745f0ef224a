use std::path::PathBuf;

use crate::matrix::ImageMatrix;

pub type Result<T> = std::result::Result<T, TvError>;

#[derive(Debug, thiserror::Error)]
pub enum TvError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An iterative method stopped without meeting its tolerance. The best
    /// iterate seen so far is attached when one exists.
    #[error("did not converge: {message}")]
    Convergence {
        message: String,
        best: Option<Box<ImageMatrix>>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: u64, message: String },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl TvError {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        TvError::Argument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        TvError::Shape(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>, best: Option<ImageMatrix>) -> Self {
        TvError::Convergence {
            message: msg.into(),
            best: best.map(Box::new),
        }
    }

    /// Process exit code used by the command-line front end: solver
    /// non-convergence maps to 2, everything else the user can fix maps to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            TvError::Convergence { .. } => 2,
            _ => 1,
        }
    }
}
