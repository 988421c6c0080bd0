use thiserror::Error;

use crate::green::SolvabilityReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix at n = {index} is numerically singular (sigma_min / sigma_max = {ratio:e})")]
    InversionFailure { index: i64, ratio: f64 },

    #[error("state sequence has {0} samples, need at least 2")]
    RangeTooShort(usize),

    #[error("eigenvalue {re} + {im}i of the {axis} tail lies within the gap tolerance of the unit circle")]
    UnitCircleEigenvalue {
        axis: &'static str,
        re: f64,
        im: f64,
    },

    #[error("window [{lo}, {hi}] is not contained in the {axis} semi-axis")]
    WrongAxis {
        axis: &'static str,
        lo: i64,
        hi: i64,
    },

    #[error(
        "no dichotomy certificate on the {axis} semi-axis: fitted rate {lambda} is not below 1"
    )]
    NoCertificate { axis: &'static str, lambda: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("{name} is not idempotent (defect {defect:e})")]
    NotIdempotent { name: &'static str, defect: f64 },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("not solvable: residual norm {:e}", .0.residual_norm)]
    NotSolvable(Box<SolvabilityReport>),

    #[error("truncated problem is infeasible: least-squares residual {residual:e} exceeds {threshold:e}")]
    InfeasibleTruncation { residual: f64, threshold: f64 },

    #[error("index ranges do not match: {0}")]
    RangeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown demo `{0}` (expected saddle, resonant or trichotomy)")]
    UnknownDemo(String),

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
