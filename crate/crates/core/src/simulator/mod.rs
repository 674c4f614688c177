//! Euler-scheme Monte Carlo backtests of market making strategies.

mod config;
mod engine;
mod stats;

pub use config::SimConfig;
pub use engine::{
    path_rng, replay, run_path, run_path_with_log, step, step_with, Event, PathResult, StepDraws, StepEvents, Strategy,
};
pub use stats::{
    benchmark_suite, run_backtest, run_paths, write_paths_csv, BacktestStats, BenchmarkTable, Summary,
};
