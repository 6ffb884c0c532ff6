//! Experiment configuration.
//!
//! The on-disk format is flat `key = value` text, one setting per line, `#`
//! starting a comment. Every key can also be set from the command line, so
//! parsing goes through [`ExperimentConfig::set`] either way.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::env::{HintKind, PuzzleSpec};
use crate::eval::{PolicyHead, ValueHead};
use crate::mcts::SearchConfig;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    /// Seeded procedural images.
    Synthetic,
    /// PNG/PPM files in a directory, cycled in name order.
    Directory(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Mcts,
    /// Arg-max of the masked policy each step.
    GreedyPolicy,
    /// Arg-max of the value head over every one-step successor.
    GreedyValue,
}

/// How the returned game is picked among several attempts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptSelection {
    /// Highest evaluator value on the complete canvas.
    ValueHead,
    /// Best ground-truth metrics; an upper bound, not a solver.
    GroundTruthBest,
    /// Worst ground-truth metrics; a lower bound.
    GroundTruthWorst,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvaluatorSpec {
    /// Ground-truth-backed heads bound to each puzzle.
    Synthetic { policy: PolicyHead, value: ValueHead },
    /// A wire-protocol endpoint, `tcp:host:port` or `exec:program args`.
    Remote(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: PuzzleSpec,
    pub dataset: DatasetSource,
    pub puzzles: usize,
    pub master_seed: u64,
    pub solver: SolverMode,
    pub search: SearchConfig,
    pub evaluator: EvaluatorSpec,
    pub attempts: usize,
    pub attempt_selection: AttemptSelection,
    pub hints: usize,
    pub hint_kind: HintKind,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    pub report: Option<PathBuf>,
    pub render_dir: Option<PathBuf>,
    /// Include wall-clock times in the JSON report. Off by default so that
    /// reports are reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            spec: PuzzleSpec::default(),
            dataset: DatasetSource::Synthetic,
            puzzles: 200,
            master_seed: 0,
            solver: SolverMode::Mcts,
            search: SearchConfig::default(),
            evaluator: EvaluatorSpec::Synthetic {
                policy: PolicyHead::Oracle,
                value: ValueHead::Oracle,
            },
            attempts: 1,
            attempt_selection: AttemptSelection::ValueHead,
            hints: 0,
            hint_kind: HintKind::Correct,
            workers: 0,
            report: None,
            render_dir: None,
            record_timing: false,
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| config_err(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, HarnessError> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty() && value != "none").then(|| PathBuf::from(value))
}

impl ExperimentConfig {
    /// Every key accepted by [`set`](Self::set), in echo order.
    pub const KEYS: &'static [&'static str] = &[
        "patch_size",
        "patches_per_side",
        "gap_size",
        "occupancy_plane",
        "dataset",
        "puzzles",
        "master_seed",
        "solver",
        "n_visits",
        "c",
        "selection",
        "w",
        "lambda",
        "reward",
        "midgame_value",
        "use_policy",
        "action_choice",
        "tree_per_move",
        "policy",
        "value",
        "remote",
        "attempts",
        "attempt_selection",
        "hints",
        "hint_kind",
        "workers",
        "report",
        "render_dir",
        "record_timing",
    ];

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_assignment(line)
                .map_err(|e| config_err(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` string.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), HarnessError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| config_err(format!("expected key = value, got {assignment:?}")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let s = &mut self.search;
        let search_err = |e: crate::mcts::SearchError| config_err(format!("{key}: {e}"));
        match key {
            "patch_size" | "patches_per_side" | "gap_size" | "occupancy_plane" => {
                let (mut ps, mut n, mut gap) = (
                    self.spec.patch_size(),
                    self.spec.patches_per_side(),
                    self.spec.gap_size(),
                );
                let mut channels = self.spec.channels();
                match key {
                    "patch_size" => ps = parse(key, value)?,
                    "patches_per_side" => n = parse(key, value)?,
                    "gap_size" => gap = parse(key, value)?,
                    _ => channels = if parse_bool(key, value)? { 4 } else { 3 },
                }
                self.spec = PuzzleSpec::with_channels(ps, n, gap, channels)
                    .map_err(|e| config_err(format!("{key}: {e}")))?;
            }
            "dataset" => {
                self.dataset = match value {
                    "synthetic" => DatasetSource::Synthetic,
                    dir => DatasetSource::Directory(PathBuf::from(dir.strip_prefix("dir:").unwrap_or(dir))),
                }
            }
            "puzzles" => self.puzzles = parse(key, value)?,
            "master_seed" => self.master_seed = parse(key, value)?,
            "solver" => {
                self.solver = match value {
                    "mcts" => SolverMode::Mcts,
                    "greedy-policy" => SolverMode::GreedyPolicy,
                    "greedy-value" => SolverMode::GreedyValue,
                    _ => return Err(config_err(format!("solver: unknown mode {value:?}"))),
                }
            }
            "n_visits" => s.n_visits = parse(key, value)?,
            "c" => s.c = parse(key, value)?,
            "selection" => s.selection = value.parse().map_err(search_err)?,
            "w" => s.w = parse(key, value)?,
            "lambda" => s.lambda = parse(key, value)?,
            "reward" => s.reward_mode = value.parse().map_err(search_err)?,
            "midgame_value" => s.midgame_value = parse_bool(key, value)?,
            "use_policy" => s.use_policy = parse_bool(key, value)?,
            "action_choice" => s.action_choice = value.parse().map_err(search_err)?,
            "tree_per_move" => s.tree_per_move = parse_bool(key, value)?,
            "policy" | "value" => {
                let (mut policy, mut head) = match &self.evaluator {
                    EvaluatorSpec::Synthetic { policy, value } => (*policy, *value),
                    EvaluatorSpec::Remote(_) => (PolicyHead::Oracle, ValueHead::Oracle),
                };
                let bad = |e: crate::eval::EvalError| config_err(format!("{key}: {e}"));
                if key == "policy" {
                    policy = value.parse().map_err(bad)?;
                } else {
                    head = value.parse().map_err(bad)?;
                }
                self.evaluator = EvaluatorSpec::Synthetic { policy, value: head };
            }
            "remote" => self.evaluator = EvaluatorSpec::Remote(value.to_owned()),
            "attempts" => self.attempts = parse(key, value)?,
            "attempt_selection" => {
                self.attempt_selection = match value {
                    "value-head" => AttemptSelection::ValueHead,
                    "ground-truth-best" => AttemptSelection::GroundTruthBest,
                    "ground-truth-worst" => AttemptSelection::GroundTruthWorst,
                    _ => return Err(config_err(format!("attempt_selection: unknown rule {value:?}"))),
                }
            }
            "hints" => self.hints = parse(key, value)?,
            "hint_kind" => {
                self.hint_kind = match value {
                    "correct" => HintKind::Correct,
                    "central" => HintKind::Central,
                    _ => return Err(config_err(format!("hint_kind: expected correct or central, got {value:?}"))),
                }
            }
            "workers" => self.workers = parse(key, value)?,
            "report" => self.report = optional_path(value),
            "render_dir" => self.render_dir = optional_path(value),
            "record_timing" => self.record_timing = parse_bool(key, value)?,
            _ => return Err(config_err(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.puzzles == 0 {
            return Err(config_err("puzzles must be >= 1"));
        }
        if self.attempts == 0 {
            return Err(config_err("attempts must be >= 1"));
        }
        if self.hints >= self.spec.patches() {
            return Err(config_err(format!(
                "hints must be below the patch count {}",
                self.spec.patches()
            )));
        }
        if self.hint_kind == HintKind::Central && self.spec.center_position().is_none() {
            return Err(config_err("central hints need an odd number of patches per side"));
        }
        self.search
            .validate()
            .map_err(|e| config_err(e.to_string()))
    }

    /// The value of `key` as it would be written in a config file.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = &self.search;
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_owned(), |p| p.display().to_string());
        Some(match key {
            "patch_size" => self.spec.patch_size().to_string(),
            "patches_per_side" => self.spec.patches_per_side().to_string(),
            "gap_size" => self.spec.gap_size().to_string(),
            "occupancy_plane" => self.spec.has_occupancy_plane().to_string(),
            "dataset" => match &self.dataset {
                DatasetSource::Synthetic => "synthetic".to_owned(),
                DatasetSource::Directory(d) => format!("dir:{}", d.display()),
            },
            "puzzles" => self.puzzles.to_string(),
            "master_seed" => self.master_seed.to_string(),
            "solver" => self.solver.to_string(),
            "n_visits" => s.n_visits.to_string(),
            "c" => s.c.to_string(),
            "selection" => s.selection.to_string(),
            "w" => s.w.to_string(),
            "lambda" => s.lambda.to_string(),
            "reward" => s.reward_mode.to_string(),
            "midgame_value" => s.midgame_value.to_string(),
            "use_policy" => s.use_policy.to_string(),
            "action_choice" => s.action_choice.to_string(),
            "tree_per_move" => s.tree_per_move.to_string(),
            "policy" | "value" | "remote" => match (&self.evaluator, key) {
                (EvaluatorSpec::Synthetic { policy, .. }, "policy") => policy.to_string(),
                (EvaluatorSpec::Synthetic { value, .. }, "value") => value.to_string(),
                (EvaluatorSpec::Remote(r), "remote") => r.clone(),
                _ => "none".to_owned(),
            },
            "attempts" => self.attempts.to_string(),
            "attempt_selection" => self.attempt_selection.to_string(),
            "hints" => self.hints.to_string(),
            "hint_kind" => match self.hint_kind {
                HintKind::Central => "central",
                _ => "correct",
            }
            .to_owned(),
            "workers" => self.workers.to_string(),
            "report" => path(&self.report),
            "render_dir" => path(&self.render_dir),
            "record_timing" => self.record_timing.to_string(),
            _ => return None,
        })
    }

    /// Every setting as `(key, value)` in [`KEYS`](Self::KEYS) order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        Self::KEYS
            .iter()
            .map(|&k| (k.to_owned(), self.get(k).expect("listed key")))
            .collect()
    }

    /// The settings that can change a result: everything except output
    /// locations and the worker count.
    pub fn result_pairs(&self) -> Vec<(String, String)> {
        self.pairs()
            .into_iter()
            .filter(|(k, _)| !matches!(k.as_str(), "workers" | "report" | "render_dir"))
            .collect()
    }

    /// Config-file text that parses back to `self`.
    pub fn to_file_string(&self) -> String {
        self.pairs()
            .into_iter()
            .filter(|(k, v)| !(v == "none" && matches!(k.as_str(), "policy" | "value" | "remote")))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mcts => "mcts",
            Self::GreedyPolicy => "greedy-policy",
            Self::GreedyValue => "greedy-value",
        })
    }
}

impl fmt::Display for AttemptSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ValueHead => "value-head",
            Self::GroundTruthBest => "ground-truth-best",
            Self::GroundTruthWorst => "ground-truth-worst",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::{RewardMode, Selection};

    #[test]
    fn parses_a_config_file() {
        let cfg = ExperimentConfig::parse_str(
            "# bench\npuzzles = 20\nn_visits = 100  # fewer\nselection = uct\nreward = ground-truth\n\
             policy = noisy:0.3\nvalue = const:1\nattempts = 3\nattempt_selection = ground-truth-best\n",
        )
        .unwrap();
        assert_eq!(cfg.puzzles, 20);
        assert_eq!(cfg.search.n_visits, 100);
        assert_eq!(cfg.search.selection, Selection::Uct);
        assert_eq!(cfg.search.reward_mode, RewardMode::GroundTruth);
        assert_eq!(
            cfg.evaluator,
            EvaluatorSpec::Synthetic {
                policy: PolicyHead::Noisy(0.3),
                value: ValueHead::Constant(1.0)
            }
        );
        assert_eq!(cfg.attempt_selection, AttemptSelection::GroundTruthBest);
    }

    #[test]
    fn file_string_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("patches_per_side", "2").unwrap();
        cfg.set("gap_size", "0").unwrap();
        cfg.set("dataset", "dir:/tmp/images").unwrap();
        cfg.set("lambda", "0.25").unwrap();
        cfg.set("report", "out.json").unwrap();
        assert_eq!(ExperimentConfig::parse_str(&cfg.to_file_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "puzzles = 0",
            "attempts = 0",
            "bogus = 1",
            "n_visits = many",
            "hints = 9",
            "selection = greedy",
            "policy = noisy:2",
            "missing equals sign",
        ] {
            assert!(
                matches!(ExperimentConfig::parse_str(text), Err(HarnessError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn every_key_is_readable() {
        let cfg = ExperimentConfig::default();
        for k in ExperimentConfig::KEYS {
            assert!(cfg.get(k).is_some(), "{k}");
        }
    }
}
