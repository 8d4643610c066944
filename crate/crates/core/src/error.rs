use thiserror::Error;

/// Everything that can go wrong while validating a process or running an
/// enumeration / experiment.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet must have at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),

    #[error("probability vector is invalid: {0}")]
    NotNormalized(String),

    #[error("row {row} of the transition matrix sums to {sum}")]
    NonStochastic { row: usize, sum: f64 },

    #[error("initial vector is not stationary (max deviation {deviation:e})")]
    NotStationary { deviation: f64 },

    #[error("transition matrix is reducible")]
    Reducible,

    #[error("transition matrix is periodic with period {0}")]
    Periodic(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: u32, size: usize },

    #[error("words must be non-empty")]
    EmptyWord,

    #[error("invalid length {0}")]
    InvalidLength(usize),

    #[error("invalid gap {0}")]
    InvalidGap(i64),

    #[error("invalid order n={0}")]
    InvalidOrder(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration of {required} cylinders exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("variance series did not converge within {0} terms")]
    SeriesNotConverged(usize),

    #[error("curve never reaches threshold {0}")]
    NotReached(f64),

    #[error("limiting variance is zero; standardization undefined")]
    DegenerateVariance,

    #[error("grid point {needed} exceeds trajectory length {available}")]
    GridExceedsTrajectory { needed: usize, available: usize },

    #[error("prefix did not recur within {0} steps")]
    NotFound(usize),

    #[error("not-found rate {rate} exceeds the allowed {allowed}")]
    NotFoundRate { rate: f64, allowed: f64 },

    #[error("invalid alpha {0}; must lie in (0, 1)")]
    InvalidAlpha(f64),

    #[error("spec file: {0}")]
    SpecFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
