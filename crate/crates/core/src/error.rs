//! Error type shared by every module.

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// The sampling design cannot support the requested computation
    /// (singular information matrix, emptied training fold, underflowed densities).
    #[error("degenerate design: {0}")]
    DegenerateDesign(&'static str),

    #[error("insufficient data: need more than {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("criterion undefined: {0}")]
    SingularCriterion(&'static str),

    #[error("concentration search failed: every evaluation was degenerate")]
    SearchFailed,

    #[error("statistic undefined: {0}")]
    UndefinedStatistic(&'static str),
}
