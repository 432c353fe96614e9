//! Benchmark harness: problem generation, optimiser runs, sweeps and reports.

pub mod cli;
pub mod error;
pub mod output;
pub mod report;
pub mod runner;
pub mod spec;

pub use error::{BenchError, Result};
pub use runner::{run_on_problem, run_sweep, RunRecord, TraceRow};
pub use spec::{AlgoSpec, Algorithm, ExperimentSpec, RadiusRule};
