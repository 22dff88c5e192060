//! Benchmark crate; see `benches/planner.rs`.
