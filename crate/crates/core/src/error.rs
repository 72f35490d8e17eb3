use std::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the supported domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition on an input was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative numerical routine failed to reach its tolerance.
    #[error("numerical error: {message} (residual estimate {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    /// A time-stepping run drifted beyond its accuracy sentinels.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// The Floquet drive coefficient J1(2Ω) is too close to one of its zeros.
    #[error(
        "singular Floquet drive: |J1(2Ω)| = {j1:.3e} at Ω = {capital_omega} is inside the guard band \
         (2Ω is {distance:.3e} from the J1 zero at {zero:.6})"
    )]
    Singularity {
        capital_omega: f64,
        j1: f64,
        zero: f64,
        distance: f64,
    },

    /// Two eigenvalues are closer than the degeneracy threshold.
    #[error("degenerate spectrum: levels {lower} and {upper} are separated by {gap:.3e}")]
    Degeneracy { lower: usize, upper: usize, gap: f64 },

    /// Requested samples do not exist on a recording grid.
    #[error("grid error: {0}")]
    Grid(String),

    /// Nonlinear least squares did not converge.
    #[error("fit error: {message} (residual norm {residual_norm:.3e})")]
    Fit { message: String, residual_norm: f64 },

    /// A configuration file is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid command-line or API usage.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit code assigned to each error class by the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
}

impl fmt::Display for ExitCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as i32)
    }
}

impl Error {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::Usage(_) => ExitCode::Usage,
            Error::Config(_) => ExitCode::Config,
            Error::Io(_) => ExitCode::Io,
            _ => ExitCode::Numerical,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
