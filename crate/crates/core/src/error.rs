use crate::lattice::Family;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("family mismatch: expected {expected}, got {found}")]
    FamilyMismatch { expected: Family, found: Family },

    #[error("invalid couplings: {0}")]
    InvalidCouplings(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("time {time} outside schedule window [{start}, {end}]")]
    OutsideWindow { time: f64, start: f64, end: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("eigensolver did not converge for eigenvalue {0}")]
    NoConvergence(usize),

    #[error("state tracking lost at t = {time} (best overlap {overlap:.3})")]
    Tracking { time: f64, overlap: f64 },

    #[error("degenerate zero-energy subspace of dimension {dimension}")]
    Degenerate { dimension: usize },

    #[error("expected {expected} in-gap states at t = {time}, found {found}")]
    InGapCount {
        time: f64,
        expected: usize,
        found: usize,
    },

    #[error("spectrum has {0} states, need at least 4")]
    SpectrumTooSmall(usize),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}
