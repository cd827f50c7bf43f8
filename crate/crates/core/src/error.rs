use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure kinds surfaced by every stage of the link.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("buffer too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("unstable filter: pole magnitude {0:.6}")]
    UnstableFilter(f64),

    #[error("no spectral line found in pilot band (peak/median {0:.1} dB)")]
    NoPilot(f64),

    #[error("phase tracker diverged at sample {0}")]
    TrackerDiverged(usize),

    #[error("ambiguous synchronisation: peak {peak:.3}, runner-up {second:.3}")]
    AmbiguousSync { peak: f64, second: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("unphysical covariance: {0}")]
    Unphysical(String),

    #[error("ensemble: {0}")]
    Ensemble(String),

    #[error("matrix construction: {0}")]
    Construction(String),

    #[error("no root in search interval: {0}")]
    NoRoot(String),

    #[error("format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::TooShort { .. } => "too_short",
            Error::UnstableFilter(_) => "unstable_filter",
            Error::NoPilot(_) => "no_pilot",
            Error::TrackerDiverged(_) => "tracker_diverged",
            Error::AmbiguousSync { .. } => "ambiguous_sync",
            Error::Calibration(_) => "calibration",
            Error::Unphysical(_) => "unphysical",
            Error::Ensemble(_) => "ensemble",
            Error::Construction(_) => "construction",
            Error::NoRoot(_) => "no_root",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Context { source, .. } => source.kind(),
        }
    }

    /// Wraps the error with the frame, trial or file it came from.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
}

/// `result.context(..)` for any of our results.
pub trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
