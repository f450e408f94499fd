//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulation and estimation layers.
///
/// Scalar payloads are widened to `f64` so the enum stays non-generic.
#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency {value} rad/s is outside the supported range (must be >= {min})")]
    FrequencyOutOfRange { value: f64, min: f64 },

    #[error("duration {value} s must be strictly positive")]
    NonPositiveDuration { value: f64 },

    #[error("invalid parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("wave schedule is empty")]
    EmptySchedule,

    #[error("time {t} s precedes the first schedule segment at {start} s")]
    TimeBeforeSchedule { t: f64, start: f64 },

    #[error("irregular wave spectrum has no components")]
    EmptySpectrum,

    #[error("plant state became non-finite at t = {t} s")]
    NonFiniteState { t: f64 },

    #[error("power trace covers {have} samples but the measurement window needs {need}")]
    TraceTooShort { have: usize, need: usize },

    #[error("measurement windows must satisfy 0 < T1 < T2 < T (got {t1}, {t2}, {t})")]
    WindowOrdering { t1: f64, t2: f64, t: f64 },

    #[error("prior mean lies outside the constraint region")]
    PriorOutsideConstraints,

    #[error(
        "prior places too little mass inside the constraint region \
         ({accepted} of {requested} particles after {attempts} draws)"
    )]
    PriorMassTooLow {
        accepted: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("subsample size {count} is outside 1..={available}")]
    BadSubsampleSize { count: usize, available: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario configs must share the same wave and seed for comparison: {0}")]
    ComparisonMismatch(String),

    #[error("failed to parse config: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
