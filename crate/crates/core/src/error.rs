use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("degenerate X-gradient (|grad| = {norm:e} <= floor {floor:e})")]
    DegenerateGradient { norm: f64, floor: f64 },

    #[error("quadrature too coarse: {points} ball samples (need at least 8)")]
    QuadratureTooCoarse { points: usize },

    #[error("epsilon ladder invalid: {0}")]
    InvalidLadder(String),

    #[error("residual magnitudes not monotone along the ladder: {0}")]
    NonMonotoneResiduals(String),

    #[error("time {t} outside ({lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("samples {i} and {j} violate Lipschitz bound {declared}: ratio {ratio}")]
    LipschitzViolation { i: usize, j: usize, ratio: f64, declared: f64 },

    #[error("point outside the closure of the cylinder: {0}")]
    OutsideClosure(String),

    #[error("interpolation query outside grid: {0}")]
    OutOfGrid(String),

    #[error("grid geometry mismatch")]
    GeometryMismatch,

    #[error("step attempted from a terminal state")]
    TerminalStep,

    #[error("invalid config: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
