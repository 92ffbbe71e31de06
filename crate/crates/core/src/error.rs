use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which numerical guard tripped during an evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardKind {
    NonFinite,
    GradientBlowUp,
    MassDrift,
}

impl std::fmt::Display for GuardKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GuardKind::NonFinite => "non-finite state",
            GuardKind::GradientBlowUp => "gradient blow-up",
            GuardKind::MassDrift => "mass drift",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("derivative order {order} exceeds configured maximum {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("time {t} outside tabulated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("numerical guard tripped at t = {t}: {kind} ({detail})")]
    Guard {
        t: f64,
        kind: GuardKind,
        detail: String,
    },

    #[error("Hill solution nu vanishes near t = {t}")]
    ZeroCrossing { t: f64 },

    #[error("contraction estimate {estimate:.4} >= {limit}; increase T (currently {t_start})")]
    Contraction {
        estimate: f64,
        limit: f64,
        t_start: f64,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("rescaled coordinates leave the box: mass fraction {fraction:e} lost")]
    BoundaryMass { fraction: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from input validation rather than from the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::InvalidArgument(_)
                | Error::Validation(_)
                | Error::Config(_)
                | Error::DerivativeOrder { .. }
        )
    }
}
