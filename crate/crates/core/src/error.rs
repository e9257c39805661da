use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent program, gate or option.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("configuration space of dimension {dim} exceeds the cap of {cap}")]
    Size { dim: u128, cap: usize },

    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge after {iterations} operator applications (best residual {best_residual:.3e})")]
    Convergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("row-0 block norm {norm:.3e} is too small to determine the input")]
    IndeterminateInput { norm: f64 },

    #[error("development residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Consistency { residual: f64, tolerance: f64 },

    #[error("output of qubit {qubit} does not factor: {reason}")]
    NonFactoringOutput { qubit: usize, reason: String },

    #[error("measured gap {gap:.6e} exceeds the variational upper bound {upper:.6e}")]
    UpperBoundViolation { gap: f64, upper: f64 },

    #[error("bad data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } | Error::Numerical(_) => 3,
            Error::Consistency { .. } | Error::IndeterminateInput { .. } => 4,
            Error::UpperBoundViolation { .. } | Error::NonFactoringOutput { .. } => 1,
            Error::Io(_) | Error::Csv(_) => 1,
            Error::Validation(_)
            | Error::Size { .. }
            | Error::Domain(_)
            | Error::Data(_)
            | Error::Json(_) => 2,
        }
    }

    /// Short stable tag, used as a per-row status in sweeps.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Size { .. } => "size",
            Error::Domain(_) => "domain",
            Error::Convergence { .. } => "convergence",
            Error::Numerical(_) => "numerical",
            Error::IndeterminateInput { .. } => "indeterminate-input",
            Error::Consistency { .. } => "consistency",
            Error::NonFactoringOutput { .. } => "non-factoring-output",
            Error::UpperBoundViolation { .. } => "upper-bound-violation",
            Error::Data(_) => "data",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
