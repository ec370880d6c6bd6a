use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("invalid quadrature order {0} (expected 1..=64)")]
    QuadratureOrder(usize),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel pieces disagree on the diagonal: |k1 - k2| = {mismatch:e} at s = {s}")]
    Continuity { s: f64, mismatch: f64 },

    #[error("unknown kernel `{name}` (available: {available})")]
    UnknownKernel { name: String, available: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("eigenvalue iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("no eigenvalue passed the imaginary-part screen")]
    NoRealCandidate,

    #[error("eigenvector block is numerically zero")]
    DegenerateVector,

    #[error("function vanishes on the evaluation grid")]
    ZeroFunction,

    #[error("eigenvalue is zero; cannot iterate")]
    ZeroEigenvalue,

    #[error("mesh sizes must double at each step, got {0:?}")]
    NonDoubling(Vec<usize>),

    #[error("errors must be positive for rate computation, got {0}")]
    NonPositiveError(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether this error came out of the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::NoRealCandidate
                | Error::DegenerateVector
                | Error::ZeroFunction
                | Error::ZeroEigenvalue
                | Error::NonFinite(_)
                | Error::Domain(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
