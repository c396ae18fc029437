use std::io;
use std::path::{Path, PathBuf};

/// Errors from loading inputs, running the pipeline and writing outputs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: no usable faces", path.display())]
    EmptyMesh { path: PathBuf },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("no node within {radius} m of ({x}, {y})")]
    NoNodeNear { x: f64, y: f64, radius: f64 },

    #[error("heatmap needs a lattice-sampled node set: {0}")]
    NotLattice(String),

    #[error(transparent)]
    Core(#[from] weathervis_core::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const NUMERIC: u8 = 4;
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Error {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Error {
        match self {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        use weathervis_core::Error as Core;
        match self {
            Error::Config(_) => exit::CONFIG,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::EmptyMesh { .. }
            | Error::Format { .. }
            | Error::NoNodeNear { .. }
            | Error::NotLattice(_) => exit::INPUT,
            Error::Stage { source, .. } => source.exit_code(),
            Error::Core(core) => match core {
                Core::InvalidGrid(_) | Core::InvalidArgument { .. } => exit::CONFIG,
                Core::MieNonConvergence { .. }
                | Core::QuadratureNonConvergence { .. }
                | Core::NonNormalizedDirection { .. }
                | Core::NonFiniteOrigin
                | Core::WeightMismatch { .. } => exit::NUMERIC,
                _ => exit::INPUT,
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
