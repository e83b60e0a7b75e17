use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// An exponential weight would exceed [`crate::EXP_LIMIT`].
    #[error("amplification overflow: exponent {exponent:.4} exceeds {limit}{}", fmt_time(*time))]
    AmplificationOverflow {
        exponent: f64,
        limit: f64,
        time: Option<f64>,
    },

    #[error("fields live on different lattices")]
    LatticeMismatch,

    #[error("Picard iteration does not contract (ratios {ratios:?} at iteration {iteration})")]
    NoContraction { iteration: usize, ratios: Vec<f64> },

    #[error("path crosses the Gevrey radius at t = {stopping_time} before the horizon {horizon}")]
    BeyondStoppingTime { stopping_time: f64, horizon: f64 },

    #[error("step rejected at t = {t}: L2 norm grew by a factor {growth:.3e}")]
    StepRejected { t: f64, growth: f64 },

    #[error("Gevrey norm increased at t = {t}: {previous:.17e} -> {current:.17e}")]
    MonotonicityViolation { t: f64, previous: f64, current: f64 },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_time(t: Option<f64>) -> String {
    match t {
        Some(t) => format!(" at t = {t}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Attach the simulation time to an overflow raised deep inside an operator.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::AmplificationOverflow {
                exponent, limit, ..
            } => Error::AmplificationOverflow {
                exponent,
                limit,
                time: Some(t),
            },
            other => other,
        }
    }

    /// Whether this error reflects a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::AmplificationOverflow { .. }
                | Error::NoContraction { .. }
                | Error::BeyondStoppingTime { .. }
                | Error::StepRejected { .. }
        )
    }
}
