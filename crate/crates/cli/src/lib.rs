//! Experiment grids, bound data and the 2D deblurring run on top of
//! `fredholm-core`, with CSV/JSON output.

pub mod blur;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;

pub use blur::{blur2d_run, run_blur2d, Blur2dConfig, Blur2dOutput};
pub use config::{ExperimentConfig, Method, Rule};
pub use error::{CliError, Result};
pub use experiment::{
    bench_rows, bound_figure, prepare, run_bench, run_bound_figure, solve_cell, summarize, BenchOutput, BoundOutput,
    BoundRow, BoundRun, CellOutcome, Prepared, ResultRow, SummaryCell,
};
