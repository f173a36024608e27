use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into two families that the command line maps onto distinct
/// exit codes: configuration problems (bad input, violated preconditions) and
/// numerical failures (non-convergence, no crossing found).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("body force table: {0}")]
    ForceTable(String),

    #[error("x-dependent {which} constant: spread {spread:.3e} exceeds tolerance {tol:.3e}")]
    XDependentConstant {
        which: &'static str,
        spread: f64,
        tol: f64,
    },

    #[error("input is not even in w: odd-part energy ratio {ratio:.3e}")]
    NotEven { ratio: f64 },

    #[error("stagnation breach: h_z = {hz:.3e} at node (w index {j}, z index {i})")]
    StagnationBreach { j: usize, i: usize, hz: f64 },

    #[error("inversion breakdown at node (w index {j}, z index {i}): alpha^2 = {alpha_sq:.3e}")]
    InversionBreakdown { j: usize, i: usize, alpha_sq: f64 },

    #[error("no crossing of mu = -1 in [{from}, {to}]")]
    NoCrossing { from: f64, to: f64 },

    #[error("no sign change of the shooting function below mu = {mu_max:.3e}")]
    NoSignChange { mu_max: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("continuation failed at step {step}: {reason}")]
    Continuation { step: usize, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Config { .. }
                | Error::ForceTable(_)
                | Error::XDependentConstant { .. }
                | Error::NotEven { .. }
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
