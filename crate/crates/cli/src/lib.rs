//! Command-line front end pieces: configuration parsing, result tables and
//! deterministic formatting.

pub mod config;
pub mod fmt;
pub mod report;
