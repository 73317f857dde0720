//! Experiment specs, traces and reports, and the `modavg` command line.

mod cli;
mod run;
mod spec;
mod tables;

pub use cli::{main_with_args, main_with_io, EXIT_INCONCLUSIVE, EXIT_SUITE_FAILURE};
pub use run::{output_paths, run_experiment, write_atomic, FinalState, Prediction, RunOutput, RunReport};
pub use spec::{nth_prime_upper_bound, CheckpointSpec, Coord, ExperimentSpec, OutputSpec, Preset, VectorSpec, DEFAULT_TRACE_DIM};
pub use tables::{TableSource, TABLE_CACHE_ENV};
