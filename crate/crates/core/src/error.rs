use thiserror::Error;

/// Errors surfaced by mesh construction, assembly, solves and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("triangle {index} is inverted or degenerate (signed area {area:e})")]
    InvertedTriangle { index: usize, area: f64 },

    #[error("unmatched periodic boundary vertex at ({x}, {y})")]
    UnmatchedPeriodicVertex { x: f64, y: f64 },

    #[error("invalid boundary setup: {0}")]
    Boundary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("linear solve did not converge: relative residual {residual:e} (limit {limit:e})")]
    Residual { residual: f64, limit: f64 },

    #[error("instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("config error at line {line}, key `{key}`: {msg}")]
    Config {
        line: usize,
        key: String,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
