use thiserror::Error;

/// Errors surfaced by the library. `Precondition` maps to CLI exit code 2,
/// the numeric failures (`ZeroOnContour`, `RootsNotConverged`, `Overflow`)
/// to exit code 3.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index beyond table")]
    IndexBeyondTable,

    #[error("outside certified radius: |z| = {actual:.6} > r_valid = {limit:.6}")]
    OutsideCertifiedRadius { actual: f64, limit: f64 },

    #[error("zero on contour: normalized modulus {min_modulus:.3e} below certification threshold")]
    ZeroOnContour { min_modulus: f64 },

    #[error("root finding did not converge after {iterations} iterations (max residual {residual:.3e})")]
    RootsNotConverged { iterations: usize, residual: f64 },

    #[error("singular measures: profile weight is zero at index {0} with nonzero coefficient")]
    SingularMeasure(usize),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_)
            | Error::IndexBeyondTable
            | Error::OutsideCertifiedRadius { .. }
            | Error::SingularMeasure(_)
            | Error::InsufficientData(_) => 2,
            Error::ZeroOnContour { .. } | Error::RootsNotConverged { .. } | Error::Overflow(_) => 3,
        }
    }
}
