//! Error types shared across the planner and simulator.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A formula was evaluated outside its mathematical domain.
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    /// The team size must be even for the pincer pairing.
    #[error("team size must be even, got n = {n}")]
    OddTeamSize { n: u32 },

    /// The sweeper speed does not exceed the threshold needed by the
    /// requested operation.
    #[error("sweeper speed {speed} does not exceed required {required} ({context})")]
    InfeasibleSpeed {
        speed: f64,
        required: f64,
        context: &'static str,
    },

    /// No critical speed exists for this scenario.
    #[error("scenario is infeasible: {message}")]
    InfeasibleScenario { message: String },

    /// The root finder failed to converge even with the bisection fallback.
    #[error("root finding did not converge: {context} (last iterate {last})")]
    NoConvergence { context: &'static str, last: f64 },

    /// A scenario parameter violates its invariant.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// The simulation grid cannot contain the scenario.
    #[error("grid too small: half extent {half_extent} < required {required}")]
    GridTooSmall { half_extent: f64, required: f64 },

    /// A sweeper's accumulated sweep angle left its sector before the phase
    /// machine transitioned.
    #[error("phase desync: {message}")]
    PhaseDesync { message: String },

    /// Two redundant computations of the same quantity disagree beyond
    /// tolerance.
    #[error("internal consistency failure in {context}: {message}")]
    InternalConsistency {
        context: &'static str,
        message: String,
    },

    /// File output failed.
    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
