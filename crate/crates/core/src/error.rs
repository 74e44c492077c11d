use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("mesh quality: {0}")]
    MeshQuality(String),

    #[error("mesh format: {0}")]
    MeshFormat(String),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("series truncation: {0}")]
    Truncation(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("validity: {0}")]
    Validity(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
