//! Analysis toolkit for cross-embodiment gripper benchmarks.
//!
//! Sessions of grasp attempts, transfer cycles and sensor traces are loaded
//! from on-disk bundles ([`ingest`]), checked against the model invariants
//! ([`model::validate_session`]) and reduced to metric families
//! ([`metrics`]) under one statistical convention ([`stats`]). The
//! [`report`] module assembles everything into JSON or Markdown reports and
//! [`synth`] generates sessions with known ground truth.

pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;
pub mod signal;
pub mod stats;
pub mod synth;
