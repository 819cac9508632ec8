use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scene parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid scene grid: {0}")]
    InvalidGrid(String),

    #[error("portal {id}: {reason}")]
    InvalidPortal { id: usize, reason: String },

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point {0:?} lies in a solid or out-of-bounds cell")]
    PointNotOpen([f64; 3]),

    #[error("scene has no open cells to place probes in")]
    NoOpenCells,

    #[error("bake file: {0}")]
    BakeFormat(String),

    #[error("baked dataset was produced from a different scene (hash mismatch)")]
    SceneHashMismatch,

    #[error("unknown portal id {0}")]
    UnknownPortal(usize),

    #[error("open fraction {0} outside [0, 1]")]
    OpenFractionOutOfRange(f64),

    #[error("position {0:?} outside the scene bounds")]
    OutOfBounds([f64; 3]),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
