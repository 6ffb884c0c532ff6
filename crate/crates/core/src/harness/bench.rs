//! Benchmark runs: solve a puzzle set in parallel and aggregate metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{render_canvas, well_placed, PuzzleInstance, ReassemblyMetrics};
use crate::eval::{DispatchQueue, Evaluator, RemoteEvaluator, SyntheticEvaluator};

use super::config::{EvaluatorSpec, ExperimentConfig};
use super::dataset::{puzzle_seed, Dataset, Stream};
use super::solve::{solve_with_attempts, SolveSettings};
use super::HarnessError;

/// Largest batch the dispatch queue hands a remote evaluator.
const REMOTE_BATCH: usize = 256;

/// Builds the evaluator each puzzle sees.
pub enum EvaluatorFactory {
    Synthetic {
        policy: crate::eval::PolicyHead,
        value: crate::eval::ValueHead,
        master_seed: u64,
    },
    Shared(Arc<dyn Evaluator>),
}

impl EvaluatorFactory {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        Ok(match &cfg.evaluator {
            EvaluatorSpec::Synthetic { policy, value } => Self::Synthetic {
                policy: *policy,
                value: *value,
                master_seed: cfg.master_seed,
            },
            EvaluatorSpec::Remote(endpoint) => {
                let remote: Arc<dyn Evaluator> = Arc::new(RemoteEvaluator::open(endpoint)?);
                Self::Shared(Arc::new(DispatchQueue::start(remote, REMOTE_BATCH).handle()))
            }
        })
    }

    /// The evaluator for puzzle `index`. Synthetic heads get their own noise
    /// stream per puzzle.
    pub fn for_puzzle(&self, index: usize, instance: &Arc<PuzzleInstance>) -> Arc<dyn Evaluator> {
        match self {
            Self::Synthetic {
                policy,
                value,
                master_seed,
            } => Arc::new(SyntheticEvaluator::new(
                Arc::clone(instance),
                *policy,
                *value,
                puzzle_seed(*master_seed, index, Stream::Evaluator),
            )),
            Self::Shared(e) => Arc::clone(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuzzleResult {
    pub index: usize,
    pub source_id: String,
    pub metrics: ReassemblyMetrics,
    pub well_placed: usize,
    pub chosen_attempt: usize,
    /// Metrics of every attempt, in attempt order.
    pub attempts: Vec<ReassemblyMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub puzzles: usize,
    pub mean_patch_wise: f64,
    pub mean_neighbor_wise: f64,
    pub mean_puzzle_wise: f64,
    /// `error_histogram[i]` counts puzzles with exactly `i` well-placed
    /// patches.
    pub error_histogram: Vec<usize>,
}

impl Summary {
    pub fn from_results(results: &[PuzzleResult], patches: usize) -> Self {
        let n = results.len().max(1) as f64;
        let mut error_histogram = vec![0; patches + 1];
        for r in results {
            error_histogram[r.well_placed] += 1;
        }
        Self {
            puzzles: results.len(),
            mean_patch_wise: results.iter().map(|r| r.metrics.patch_wise).sum::<f64>() / n,
            mean_neighbor_wise: results.iter().map(|r| r.metrics.neighbor_wise).sum::<f64>() / n,
            mean_puzzle_wise: results.iter().map(|r| f64::from(r.metrics.puzzle_wise)).sum::<f64>() / n,
            error_histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BTreeMap<String, String>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_wall_seconds: Option<f64>,
    pub results: Vec<PuzzleResult>,
}

/// A report plus the timings that stay out of it by default.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    pub wall_seconds: Vec<f64>,
    pub total_seconds: f64,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_json()).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
    }
}

impl BenchmarkRun {
    /// Human-readable summary.
    pub fn table(&self) -> String {
        let s = &self.report.summary;
        let mut out = String::new();
        let _ = writeln!(out, "{:<22}{}", "puzzles", s.puzzles);
        let _ = writeln!(out, "{:<22}{:.4}", "patch-wise", s.mean_patch_wise);
        let _ = writeln!(out, "{:<22}{:.4}", "neighbor-wise", s.mean_neighbor_wise);
        let _ = writeln!(out, "{:<22}{:.4}", "puzzle-wise", s.mean_puzzle_wise);
        let per_puzzle = self.wall_seconds.iter().sum::<f64>() / self.wall_seconds.len().max(1) as f64;
        let _ = writeln!(out, "{:<22}{:.4} s", "wall time / puzzle", per_puzzle);
        let _ = writeln!(out, "{:<22}{:.2} s", "wall time total", self.total_seconds);
        let _ = writeln!(out, "well-placed histogram");
        for (i, count) in s.error_histogram.iter().enumerate().rev() {
            let _ = writeln!(out, "  {i:>3}  {count:>6}");
        }
        out
    }
}

/// Runs a thread pool sized by `workers` (0: one thread per core).
pub(crate) fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn solve_settings(cfg: &ExperimentConfig) -> SolveSettings {
    SolveSettings {
        solver: cfg.solver,
        search: cfg.search,
        attempts: cfg.attempts,
        selection: cfg.attempt_selection,
        hints: cfg.hints,
        hint_kind: cfg.hint_kind,
    }
}

/// Solves every puzzle of the configured set and aggregates the metrics.
/// Results are in puzzle order whatever the worker count.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkRun, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let dataset = Dataset::open(&cfg.dataset, cfg.spec, cfg.master_seed)?;
    let instances = dataset.instances(cfg.puzzles)?;
    let factory = EvaluatorFactory::from_config(cfg)?;
    let settings = solve_settings(cfg);
    if let Some(dir) = &cfg.render_dir {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }

    let outcomes: Vec<Result<(PuzzleResult, f64), HarnessError>> = with_pool(cfg.workers, || {
        instances
            .par_iter()
            .enumerate()
            .map(|(index, instance)| {
                let t0 = Instant::now();
                let evaluator = factory.for_puzzle(index, instance);
                let seed = puzzle_seed(cfg.master_seed, index, Stream::Order);
                let out = solve_with_attempts(instance, evaluator.as_ref(), &settings, seed)?;
                let best = out.best();
                if let Some(dir) = &cfg.render_dir {
                    render_canvas(&best.terminal, &dir.join(format!("puzzle_{index:04}.png")))?;
                }
                let secs = t0.elapsed().as_secs_f64();
                Ok((
                    PuzzleResult {
                        index,
                        source_id: instance.source_id().to_owned(),
                        metrics: best.metrics.clone(),
                        well_placed: well_placed(&best.terminal, instance),
                        chosen_attempt: out.chosen,
                        attempts: out.attempts.iter().map(|a| a.metrics.clone()).collect(),
                        wall_seconds: cfg.record_timing.then_some(secs),
                    },
                    secs,
                ))
            })
            .collect()
    })?;

    let mut results = Vec::with_capacity(outcomes.len());
    let mut wall_seconds = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let (r, s) = o?;
        results.push(r);
        wall_seconds.push(s);
    }
    let summary = Summary::from_results(&results, cfg.spec.patches());
    let mean_wall = wall_seconds.iter().sum::<f64>() / wall_seconds.len().max(1) as f64;
    let report = BenchmarkReport {
        config: cfg.result_pairs().into_iter().collect(),
        summary,
        mean_wall_seconds: cfg.record_timing.then_some(mean_wall),
        results,
    };
    if let Some(path) = &cfg.report {
        report.write_json(path)?;
    }
    Ok(BenchmarkRun {
        report,
        wall_seconds,
        total_seconds: started.elapsed().as_secs_f64(),
    })
}
