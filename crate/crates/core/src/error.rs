use thiserror::Error;

/// Errors raised anywhere in the simulation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("atom detuning is zero; dipole elimination is singular")]
    SingularDetuning,

    #[error("integration diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("window {window} holds {samples} samples (need at least {min})")]
    UndersampledWindow {
        window: usize,
        samples: usize,
        min: usize,
    },

    #[error("trajectory too short: {duration} < {required}")]
    TrajectoryTooShort { duration: f64, required: f64 },

    #[error("degenerate sequence: zero variance")]
    DegenerateSequence,

    #[error("sequence too short for lag {tau_max}: length {len}")]
    SequenceTooShort { len: usize, tau_max: usize },

    #[error("empty subpopulation: {0}")]
    EmptySubpopulation(&'static str),

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("quadrature did not converge: estimated error {estimate:e} above {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("trajectory {index} (seed {seed:#018x}) failed: {source}")]
    Member {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Coarse category used for process exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::InvalidParam(_) | Error::InvalidKernel(_) => {
                ErrorCategory::Validation
            }
            Error::Diverged { .. } | Error::SingularDetuning | Error::InvalidRegime(_) => {
                ErrorCategory::Integration
            }
            Error::Member { source, .. } => source.category(),
            Error::Io(_) => ErrorCategory::Io,
            _ => ErrorCategory::Statistics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Integration,
    Statistics,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Validation => 2,
            ErrorCategory::Integration => 3,
            ErrorCategory::Statistics => 4,
            ErrorCategory::Io => 5,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
