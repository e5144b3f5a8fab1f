use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkError {
    #[error("system size must be at least {min}, got {n}")]
    SizeTooSmall { n: usize, min: usize },
    #[error("exact enumeration capped at n = {cap}, got n = {n}")]
    Capacity { n: usize, cap: usize },
    #[error("inverse temperature {0} outside the admissible range")]
    BetaOutOfRange(f64),
    #[error("schedule inadmissible at N = {n}: c * N^(-1/3) = {ratio} must be < 1")]
    Inadmissible { n: usize, ratio: f64 },
    #[error("disorder sample has no auxiliary couplings")]
    MissingAux,
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, SkError>;
