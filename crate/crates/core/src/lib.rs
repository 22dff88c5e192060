//! Planning library and worst-case simulator for the spiral pincer sweep
//! protocol: a team of fan-sensor sweepers confines and detects every mobile
//! evader initially inside a circular region.
//!
//! - [`geometry`]: fan footprints and the back-to-back pair deployment.
//! - [`analytics`]: speed benchmarks and the spiral trajectory solution.
//! - [`schedule`]: the full multi-cycle sweep schedule and time totals.
//! - [`sim`]: adversarial wavefront simulation validating confinement and
//!   clearing, with optional SVG frame export.

pub mod analytics;
pub mod error;
pub mod geometry;
pub mod schedule;
pub mod sim;

pub use analytics::{
    critical_speed, derive_constants, lambda_factor, lower_bound_speed, resolve_speed,
    simplified_critical_speed, spiral_radius, spiral_theta, DerivedConstants, ScenarioParams,
    SpeedBenchmarks, SpeedSpec,
};
pub use error::{Error, Result};
pub use geometry::{
    footprint_contains, gamma_offset, initial_deployment, phi_heading, Deployment, FootprintModel,
    Point2, RotationSense, SensorGeometry, SweeperPose,
};
pub use schedule::{build_schedule, CycleRecord, EndGame, SweepSchedule};
pub use sim::{SimConfig, SimOutcome, Verdict};
