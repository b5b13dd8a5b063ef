use alloc::string::String;

/// Errors raised by the analytical pipeline and the simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The memory factor reached one; the Gaussian-limit path must be used.
    #[error("memory factor eta = {0} is not below one")]
    DegenerateMemory(f64),
    #[error("no admissible grid step at u = {u}: widen eps' or use a moment bound")]
    DeltaSelection { u: f64 },
    #[error("non-finite series term at n = {n}: reduce delta")]
    NonFinite { n: usize },
    #[error("series did not decay within {0} terms")]
    SeriesNotConverged(usize),
    #[error("PMF support would reach {size} points (cap {cap}): increase the merge tolerance")]
    SupportExplosion { size: usize, cap: usize },
    #[error("invalid PMF: {0}")]
    InvalidPmf(String),
    #[error("operation requires a Gaussian observation model")]
    NotGaussian,
    #[error("target false-alarm rate {0} is not reachable on the threshold grid")]
    UnreachableTarget(f64),
    #[error("trajectory never crosses the target level")]
    Unreached,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
