use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numeric core. Numeric payloads are widened to `f64`
/// so the error type is independent of the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("switching rate is not finite at current {current_ua} uA")]
    RateOverflow { current_ua: f64 },

    #[error("current {current_ua} uA outside operating range [{min_ua}, {max_ua}] uA")]
    CurrentOutOfRange { current_ua: f64, min_ua: f64, max_ua: f64 },

    #[error("device voltages {v_low} V / {v_high} V do not straddle the hysteresis window [{v_tl}, {v_th}] V")]
    NoSignal { v_low: f64, v_high: f64, v_tl: f64, v_th: f64 },

    #[error("negative measurement interval {interval} s (reference and signal paths misconfigured)")]
    NegativeInterval { interval: f64 },

    #[error("reference edge never arrived")]
    MissingReference,

    #[error("race needs at least one input")]
    EmptyRace,

    #[error("probability {p} outside the supported range {range}")]
    Probability { p: f64, range: &'static str },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sample {index} is not positive ({value})")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("fit did not converge after {iterations} iterations: {reason} (chi2 = {chi_squared})")]
    FitFailed { iterations: usize, chi_squared: f64, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
