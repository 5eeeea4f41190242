//! Recommends closed issues and pull requests whose patches are reusable
//! for an open crash report.
//!
//! Pipeline: extract the crash stack trace from the issue text, generate a
//! search query from the exception signature, retrieve closed candidates
//! from a backend, then re-rank them by code similarity (greedy string
//! tiling over token classes), dependency similarity, UI similarity, and
//! issue quality.

pub mod cli;
pub mod codesim;
pub mod pipeline;
pub mod projectsim;
pub mod quality;
pub mod querygen;
pub mod rank;
pub mod search;
pub mod stacktrace;
