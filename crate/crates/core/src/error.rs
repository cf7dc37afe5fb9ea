use thiserror::Error;

/// Errors surfaced by the sampling library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lower threshold exceeds upper threshold")]
    InvertedBounds,

    #[error("denominator disk touches zero")]
    DenominatorTouchesZero,

    #[error("evaluation point outside the disk of analyticity: {0}")]
    OutsideAnalyticity(String),

    #[error("index {index} outside table of size {size}")]
    OutOfTable { index: usize, size: usize },

    #[error("degenerate problem size: n = {n}, k = {k}")]
    Degenerate { n: u64, k: u64 },

    #[error("bracket certification failed at zeta = {0}")]
    BracketFailure(f64),

    #[error("sampler refused: {0}")]
    RegimeRefused(String),

    /// The oracle could not produce a usable enclosure; the caller must
    /// move to a finer level or to the exact fallback.
    #[error("oracle escalation: {0}")]
    Escalate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
