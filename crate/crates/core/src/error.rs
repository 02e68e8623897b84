use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon has {0} vertices, at least 3 are required")]
    TooFewVertices(usize),

    #[error("polygon is not counter-clockwise (signed area {0:e})")]
    Orientation(f64),

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mesh generation failed: {0}")]
    MeshGeneration(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("assembly: {0}")]
    Assembly(String),

    #[error("linear solver breakdown: {0}")]
    LinearSolver(String),

    #[error("fixed-point iteration did not converge: {0}")]
    NotConverged(String),

    #[error("point ({0}, {1}) is outside the reference mesh")]
    Location(f64, f64),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("{0} is outside the domain [0, 1]")]
    OutOfRange(f64),

    #[error("unknown problem `{0}` (expected concus|catenoid|scherk|schwarz|disk|cantor)")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
