use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("crowd is empty")]
    EmptyCrowd,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(&'static str),
    #[error("invalid task: {0}")]
    InvalidTask(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("definitive-answer count {n} outside 0..={max}")]
    CountOutOfRange { n: usize, max: usize },
    #[error("weight undefined for n = {n}: zero denominator")]
    UndefinedWeight { n: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("estimation impossible: {0}")]
    EstimationImpossible(&'static str),
    #[error("invalid configuration Q: {0}")]
    InvalidConfiguration(&'static str),
    #[error("enumeration of {size} terms exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
}
