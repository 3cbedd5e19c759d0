use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mixture: {0}")]
    InvalidModel(String),

    #[error("degenerate component {index}: {reason}")]
    DegenerateComponent { index: usize, reason: String },

    #[error("degenerate observation range: max = min = {value}")]
    DegenerateRange { value: f64 },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("order error: {0}")]
    Order(String),

    #[error("matrix is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("{what} did not converge within {budget} iterations")]
    NonConvergence { what: &'static str, budget: usize },

    #[error("only {found} candidate roots inside the unit circle, need {needed}")]
    InsufficientRoots { found: usize, needed: usize },

    #[error("phase unwrapping is ambiguous: integers {first} and {second} both land inside the interval")]
    Ambiguity { first: i64, second: i64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
