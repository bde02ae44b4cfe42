//! Benchmark harness, file formats, and CLI plumbing around
//! `betacnmf-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod io;

pub use bench::{run_ensemble, ExperimentConfig, LossTrace, TraceRecord};
pub use config::AppError;
