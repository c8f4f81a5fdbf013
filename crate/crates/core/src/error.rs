use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a state needs at least one mode")]
    EmptyRegister,

    #[error("mode {mode} out of range for a {num_modes}-mode state")]
    ModeOutOfRange { mode: usize, num_modes: usize },

    #[error("mode {0} listed more than once")]
    DuplicateMode(usize),

    #[error("mode list must not be empty")]
    EmptyModeList,

    #[error("transmission {0} outside [0, 1]")]
    InvalidTransmission(f64),

    #[error("thermal occupation {0} is negative")]
    NegativeOccupation(f64),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("target mode {0} also appears among the conditioners")]
    TargetInConditioners(usize),

    #[error("more than one quadrature requested on conditioning mode {0}")]
    ConditionerModeRepeated(usize),

    #[error("modes are uncorrelated (|c| = {0:e}); fall back to numeric gain minimization")]
    Uncorrelated(f64),

    #[error("gain denominator 1 + g_x g_p = {0} is not positive")]
    NonPositiveDenominator(f64),

    #[error("state is not physical (min eigenvalue of cov + iJ = {0:e})")]
    NonPhysical(f64),

    #[error("insufficient samples: {samples} samples for {bins} bins (need 100 per bin)")]
    InsufficientSamples { samples: usize, bins: usize },

    #[error("no closed form: {0}")]
    NoClosedForm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
