//! Experiment orchestration: datasets, solvers, benchmarks, sweeps and
//! training-sample export.

mod bench;
mod config;
mod dataset;
mod export;
mod grid;
mod solve;
mod stats;

pub use bench::{
    run_benchmark, solve_settings, BenchmarkReport, BenchmarkRun, EvaluatorFactory, PuzzleResult, Summary,
};
pub use config::{AttemptSelection, DatasetSource, EvaluatorSpec, ExperimentConfig, SolverMode};
pub use dataset::{puzzle_seed, Dataset, Stream};
pub use export::{export_samples, read_samples, samples_from_game, ExportMode, SampleSource, TrainingSample};
pub use grid::{deactivation_cells, run_grid, sweep_cells, GridCell, GridReport, Sweep};
pub use solve::{
    attempt_orders, brute_force_solve, greedy_from, greedy_solve, hinted_start, play_once, select_attempt,
    solve_orders, solve_with_attempts, terminal_state, Attempt, AttemptsOutcome, BruteForce, GreedyMode, Scorer,
    SolveSettings, DEFAULT_LEAF_CAP,
};
pub use stats::{sign_test, SignTest};

use thiserror::Error;

use crate::env::EnvError;
use crate::eval::EvalError;
use crate::mcts::SearchError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("evaluator error: {0}")]
    Evaluator(#[from] EvalError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("io error: {0}")]
    Io(String),
    #[error("{patches} patches exceed the brute-force cap of {cap} leaves")]
    CapExceeded { patches: usize, cap: usize },
}

impl From<SearchError> for HarnessError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidConfig(m) => HarnessError::Config(m),
            SearchError::Evaluator(e) => HarnessError::Evaluator(e),
            SearchError::Env(e) => HarnessError::Env(e),
            SearchError::TerminalRoot => HarnessError::Env(EnvError::TerminalState),
        }
    }
}

impl HarnessError {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::CapExceeded { .. } => 2,
            HarnessError::Dataset(_) => 3,
            HarnessError::Evaluator(_) => 4,
            HarnessError::Env(_) | HarnessError::Io(_) => 1,
        }
    }
}
