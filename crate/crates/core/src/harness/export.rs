//! Training samples as JSON lines.
//!
//! Each line holds one state, base64 of its wire-protocol encoding, with the
//! ground-truth position of the next patch and the state's value target.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{sample_partial_state, value_target, GameState, HintKind, PuzzleInstance};
use crate::eval::wire::{decode_state, encode_state, WireState};
use crate::mcts::GameOutcome;

use super::bench::{solve_settings, with_pool, EvaluatorFactory};
use super::config::{ExperimentConfig, SolverMode};
use super::dataset::{puzzle_seed, Dataset, Stream};
use super::solve::{attempt_orders, hinted_start, play_once};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    PretrainSampler,
    MctsVisited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub puzzle: usize,
    pub turn: usize,
    pub source: SampleSource,
    /// Base64 of the wire state encoding.
    pub state: String,
    /// Solution position of the next patch, occupied or not.
    pub target_position: usize,
    pub target_value: f64,
}

impl TrainingSample {
    pub fn new(puzzle: usize, state: &GameState, instance: &PuzzleInstance, source: SampleSource) -> Option<Self> {
        let next = state.next_patch()?;
        Some(Self {
            puzzle,
            turn: state.turn(),
            source,
            state: STANDARD.encode(encode_state(state)),
            target_position: instance.solution_position(next),
            target_value: value_target(state, instance),
        })
    }

    pub fn state_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        STANDARD
            .decode(&self.state)
            .map_err(|e| HarnessError::Io(format!("sample state is not base64: {e}")))
    }

    pub fn decode_state(&self) -> Result<WireState, HarnessError> {
        Ok(decode_state(&self.state_bytes()?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportMode {
    /// Flawless prefixes with every hint count, for the policy head.
    PretrainPolicy,
    /// A flawless and a flawed prefix per hint count, for the value head.
    PretrainValue,
    /// The states a search game passed through.
    MctsVisited,
}

impl std::str::FromStr for ExportMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pretrain-p" => Ok(Self::PretrainPolicy),
            "pretrain-v" => Ok(Self::PretrainValue),
            "mcts-visited" => Ok(Self::MctsVisited),
            _ => Err(HarnessError::Config(format!(
                "export mode {s:?}: expected pretrain-p, pretrain-v or mcts-visited"
            ))),
        }
    }
}

/// One sample per move of a finished game.
pub fn samples_from_game(puzzle: usize, instance: &PuzzleInstance, game: &GameOutcome) -> Vec<TrainingSample> {
    game.moves
        .iter()
        .filter_map(|m| TrainingSample::new(puzzle, &m.state, instance, SampleSource::MctsVisited))
        .collect()
}

fn pretrain_samples(
    puzzle: usize,
    instance: &PuzzleInstance,
    mode: ExportMode,
    seed: u64,
) -> Result<Vec<TrainingSample>, HarnessError> {
    let f = instance.spec().patches();
    let mut out = Vec::new();
    for hints in 0..f {
        let s = seed.wrapping_add(hints as u64);
        let correct = sample_partial_state(instance, hints, HintKind::Correct, s)?;
        out.extend(TrainingSample::new(puzzle, &correct, instance, SampleSource::PretrainSampler));
        if mode == ExportMode::PretrainValue && hints > 0 {
            let flawed = sample_partial_state(instance, hints, HintKind::Flawed, s)?;
            out.extend(TrainingSample::new(puzzle, &flawed, instance, SampleSource::PretrainSampler));
        }
    }
    Ok(out)
}

pub fn write_samples(samples: &[TrainingSample], path: &Path) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for s in samples {
        serde_json::to_writer(&mut w, s).map_err(|e| HarnessError::Io(e.to_string()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_samples(path: &Path) -> Result<Vec<TrainingSample>, HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let file = std::fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| HarnessError::Io(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}

/// Generates samples over the configured puzzle set and writes them to
/// `path`. Returns the sample count.
pub fn export_samples(cfg: &ExperimentConfig, mode: ExportMode, path: &Path) -> Result<usize, HarnessError> {
    cfg.validate()?;
    if mode == ExportMode::MctsVisited && cfg.solver != SolverMode::Mcts {
        return Err(HarnessError::Config("mcts-visited export needs solver = mcts".into()));
    }
    let dataset = Dataset::open(&cfg.dataset, cfg.spec, cfg.master_seed)?;
    let instances = dataset.instances(cfg.puzzles)?;
    let factory = EvaluatorFactory::from_config(cfg)?;
    let settings = solve_settings(cfg);

    let per_puzzle: Vec<Result<Vec<TrainingSample>, HarnessError>> = with_pool(cfg.workers, || {
        instances
            .par_iter()
            .enumerate()
            .map(|(index, instance)| match mode {
                ExportMode::MctsVisited => {
                    let evaluator = factory.for_puzzle(index, instance);
                    let seed = puzzle_seed(cfg.master_seed, index, Stream::Order);
                    let order = attempt_orders(instance, 1, seed, cfg.hint_kind).remove(0);
                    let start = hinted_start(instance, &order, cfg.hints)?;
                    let game = play_once(start, instance, evaluator.as_ref(), &settings)?;
                    Ok(samples_from_game(index, instance, &game))
                }
                _ => pretrain_samples(index, instance, mode, puzzle_seed(cfg.master_seed, index, Stream::Hints)),
            })
            .collect()
    })?;
    let mut samples = Vec::new();
    for s in per_puzzle {
        samples.extend(s?);
    }
    write_samples(&samples, path)?;
    Ok(samples.len())
}
