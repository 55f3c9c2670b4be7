use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Łukasiewicz word: {0}")]
    InvalidWord(String),

    #[error("invalid degree statistics: {0}")]
    InvalidStatistics(String),

    #[error("spine length {k} exceeds mark depth {depth}")]
    KTooLarge { k: usize, depth: usize },

    #[error("instance has {size} nodes, above the cap of {cap}")]
    TooLarge { size: u64, cap: u64 },

    #[error("spine uses degree {degree} {used} times but only {available} nodes have it")]
    UsageExceeded { degree: usize, used: u64, available: u64 },

    #[error("no accepted sample after {0} attempts")]
    AttemptsExhausted(u64),

    #[error("invalid offspring distribution: {0}")]
    InvalidDistribution(String),

    #[error("path statistics (|n|_2^2 = n(1)): bound is vacuous, use the uniform depth law")]
    PathDegenerate,

    #[error("statistics contain degree-one nodes; bound requires n(1) = 0")]
    HasOnes,

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("series diverged: {0}")]
    Diverged(String),

    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),

    #[error("radius of convergence cannot be determined")]
    RhoUnknown,

    #[error("generating function diverges at the radius of convergence")]
    PhiDiverges,

    #[error("partition function Z_{0} is zero")]
    ZeroPartition(usize),

    #[error("bad parameters: {0}")]
    BadParameters(String),
}

pub type Result<T> = std::result::Result<T, Error>;
