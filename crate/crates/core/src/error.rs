use thiserror::Error;

use crate::linalg::SolverReport;

pub type Result<T, E = ChnsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ChnsError {
    #[error("shape mismatch for {what} field: expected {expected:?} (cols, rows), got {found_len} values")]
    ShapeMismatch { what: &'static str, expected: (usize, usize), found_len: usize },

    #[error("SAV denominator E1 + delta = {value:e} is not positive; set delta > 0")]
    NonpositiveSavDenominator { value: f64 },

    #[error("{solver} did not converge: {report}")]
    NoConvergence { solver: &'static str, report: SolverReport },

    #[error("rank-one update denominator {value:e} is singular")]
    SingularRankOneDenominator { value: f64 },

    #[error("divergence data has nonzero mean {mean:e}")]
    IncompatibleDivergenceData { mean: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    PicardNoConvergence { iterations: usize, last_update: f64 },

    #[error("final time {t_final} is not an integer multiple of dt = {dt}")]
    NonIntegerStepCount { t_final: f64, dt: f64 },

    #[error("grid {fine} is not an exact 2x refinement of {coarse}")]
    RefinementMismatch { coarse: String, fine: String },

    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("unknown {what} `{name}`")]
    UnknownKind { what: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
