//! Discrete-state Markov chains and continuous-time master-equation dynamics.

mod embed;
mod estimate;
mod kernel;
mod master;
mod order;
mod stationary;
mod walk;

pub use self::embed::{check_embeddability, matrix_log, Embeddability, LogError, LOG_SERIES_ORDER};
pub use self::estimate::{estimate_chain, simulate_chain};
pub use self::kernel::{RateMatrix, StateBinning, TransitionKernel};
pub use self::master::{integrate_master_equation, Trajectory};
pub use self::order::{test_markov_order, MarkovOrderReport, Verdict, MIN_CONTEXT_SAMPLES};
pub use self::stationary::{is_irreducible, stationary_distribution};
pub use self::walk::{coarse_grain, random_walk};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkovError {
    #[error("matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("matrix has no states")]
    Empty,
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) = {value} is negative or not finite")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("rate matrix invalid: {0}")]
    InvalidRates(String),
    #[error("symbol {symbol} outside [0, {state_count})")]
    SymbolOutOfRange { symbol: usize, state_count: usize },
    #[error("no transitions observed")]
    EmptyInput,
    #[error("prior count must be finite and non-negative, got {0}")]
    InvalidPrior(f64),
    #[error("start state {state} outside [0, {state_count})")]
    InvalidStart { state: usize, state_count: usize },
    #[error("chain is reducible; no unique stationary distribution")]
    NoUniqueStationary,
    #[error("initial vector is not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("time step {dt} too large: dt * max|rate| = {product} must be below 0.1")]
    UnstableStep { dt: f64, product: f64 },
    #[error("time parameters must be positive and finite")]
    InvalidTime,
    #[error("sequence too short: need at least {needed} steps, found {found}")]
    SequenceTooShort { needed: usize, found: usize },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("bin edges must be at least 2 strictly increasing finite values")]
    InvalidBinning,
    #[error("value {0} lies outside the binned range")]
    OutOfRange(f64),
}
