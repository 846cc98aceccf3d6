use thiserror::Error;

/// Errors raised by map construction, field evaluation, expansion assembly
/// and the reference solver.
#[derive(Debug, Error)]
pub enum Error {
    /// A point was handed to an evaluator outside the set where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid shape: {0}")]
    Shape(String),

    /// Least-squares fit of a sampled boundary did not reach the tolerance.
    #[error("conformal fit residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    FitResidual { residual: f64, tolerance: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    /// `w(x_eps) - ln eps` is too close to zero (or negative) for the corrector weight.
    #[error("scale degeneracy: w(x_eps) - ln(eps) = {0:.6e}")]
    ScaleDegeneracy(f64),

    #[error("degenerate inclusion configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("reference solution rejected: boundary residual {residual:.3e} exceeds {limit:.3e}")]
    ReferenceRejected { residual: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }

    /// Process exit status used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Shape(_) | Error::Io(_) | Error::InvalidInput(_) => 2,
            Error::Geometry(_) => 2,
            _ => 3,
        }
    }
}
