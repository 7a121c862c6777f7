use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("operation requires a vector field, got {0} component(s)")]
    NotAVectorField(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("CFL violation at t = {t}: dt = {dt} exceeds limit {limit}")]
    CflViolation { t: f64, dt: f64, limit: f64 },

    #[error("non-finite state detected at t = {t}")]
    NonFinite { t: f64 },

    #[error("blow-up guard tripped at t = {t}: max|u| = {max_u} exceeds {limit}")]
    BlowUp { t: f64, max_u: f64, limit: f64 },

    #[error("snapshot file has bad magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported snapshot format version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },

    #[error("snapshot file truncated: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
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

    /// Numerical failures map to exit status 1, usage/config problems to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
