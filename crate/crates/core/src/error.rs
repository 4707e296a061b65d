use std::path::PathBuf;

/// Errors raised by the simulator, its solvers and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter, grid or control value violates its admissibility invariant.
    #[error("invalid {what}: {reason}")]
    Validation { what: String, reason: String },

    /// Malformed configuration text.
    #[error("config line {line}: {key}: {reason}")]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    /// An iterative solver hit its iteration cap before meeting its tolerance.
    #[error("{solver} reached the iteration cap ({iterations}) with residual {residual:e}")]
    IterationLimit {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Newton could not reduce the residual of a substep.
    #[error("{substep} Newton failed after {iterations} iterations, last residual {residual:e}")]
    NewtonDivergence {
        substep: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// `c_V/dt + m` is not strictly positive somewhere: the implicit
    /// temperature reaction would lose its M-matrix structure.
    #[error("time step too large: c_V/dt + min(m) = {min_diagonal:e} <= 0")]
    DtTooLarge { min_diagonal: f64 },

    /// A field picked up NaN or infinity.
    #[error("non-finite value in {context} at cell {cell}")]
    NonFinite { context: &'static str, cell: usize },

    /// Entropy needs a strictly positive temperature.
    #[error("entropy undefined: min theta = {min_theta:e} is not positive")]
    NonpositiveTemperature { min_theta: f64 },

    /// The explicit reference integrator blew up.
    #[error("explicit reference integrator became unstable at t = {t}")]
    OracleInstability { t: f64 },

    /// Time integration gave up after repeated step failures.
    #[error("run aborted at t = {t}: {source}")]
    RunAborted {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    /// Two fields or states live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A snapshot file is malformed or has the wrong shape.
    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Failure class used for process exit codes and the FFI status codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Validation { .. } | Error::Config { .. } | Error::GridMismatch(_) => {
                ErrorClass::Validation
            }
            Error::IterationLimit { .. }
            | Error::NewtonDivergence { .. }
            | Error::DtTooLarge { .. }
            | Error::NonFinite { .. }
            | Error::NonpositiveTemperature { .. }
            | Error::OracleInstability { .. }
            | Error::RunAborted { .. } => ErrorClass::Solver,
            Error::Snapshot { .. } | Error::Io { .. } => ErrorClass::Io,
        }
    }

    /// True for failures that a smaller time step may cure.
    pub fn is_step_failure(&self) -> bool {
        matches!(
            self,
            Error::IterationLimit { .. }
                | Error::NewtonDivergence { .. }
                | Error::DtTooLarge { .. }
                | Error::NonFinite { .. }
        )
    }
}

/// Coarse failure classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Solver,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 1,
            ErrorClass::Solver => 2,
            ErrorClass::Io => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Validation => "validation",
            ErrorClass::Solver => "solver",
            ErrorClass::Io => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
