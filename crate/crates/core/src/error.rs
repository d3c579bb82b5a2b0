//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by game construction, solvers, and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sequences have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("distributions have different shapes: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("action {action} is not admissible for type {type_idx}")]
    InadmissibleAction { type_idx: usize, action: usize },

    #[error("mass {mass} at ({type_idx},{action}) is below the deviator size {size}")]
    InsufficientMass {
        type_idx: usize,
        action: usize,
        mass: f64,
        size: f64,
    },

    #[error("tractability guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("unknown element: {0}")]
    UnknownElement(String),

    #[error("no route from {source} to {destination} within {max_hops} hops")]
    NoRoute {
        source: String,
        destination: String,
        max_hops: usize,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("cost curves must be strictly increasing and differentiable for this check: {0}")]
    NonStrictCosts(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("best-response dynamics did not settle within {0} sweeps (max residual gain {1:.3e}); the objective is probably not a congestion potential")]
    DynamicsDiverged(usize, f64),

    #[error("Nash set is empty; the quantity is undefined for this draw")]
    EmptyNashSet,

    #[error("event has probability zero at n = {0}")]
    ZeroProbabilityEvent(u64),

    #[error("rejection sampling accepted too few samples ({accepted} of {budget})")]
    RejectionStarved { accepted: u64, budget: u64 },

    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
