//! Solvers: MCTS games with several patch orders, greedy baselines, and an
//! exhaustive oracle for small puzzles.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::{compute_metrics, GameState, HintKind, PatchOrder, PuzzleInstance, ReassemblyMetrics};
use crate::eval::{mask_and_renormalize, Evaluator};
use crate::mcts::{play_from, GameOutcome, SearchConfig};

use super::config::{AttemptSelection, SolverMode};
use super::HarnessError;

/// Greedy baseline flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyMode {
    Policy,
    Value,
}

/// The knobs of one solve, independent of where the puzzle came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub solver: SolverMode,
    pub search: SearchConfig,
    pub attempts: usize,
    pub selection: AttemptSelection,
    pub hints: usize,
    pub hint_kind: HintKind,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            solver: SolverMode::Mcts,
            search: SearchConfig::default(),
            attempts: 1,
            selection: AttemptSelection::ValueHead,
            hints: 0,
            hint_kind: HintKind::Correct,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Attempt {
    pub order: PatchOrder,
    pub terminal: GameState,
    pub metrics: ReassemblyMetrics,
    /// Evaluator value of the complete canvas.
    pub predicted: f64,
}

#[derive(Debug, Clone)]
pub struct AttemptsOutcome {
    pub attempts: Vec<Attempt>,
    /// Index of the attempt picked by the selection rule.
    pub chosen: usize,
}

impl AttemptsOutcome {
    pub fn best(&self) -> &Attempt {
        &self.attempts[self.chosen]
    }
}

/// Plays by arg-max of one head at every step, lowest position on ties.
pub fn greedy_solve(
    instance: &PuzzleInstance,
    order: &PatchOrder,
    evaluator: &dyn Evaluator,
    mode: GreedyMode,
) -> Result<GameState, HarnessError> {
    greedy_from(GameState::initial(instance, order)?, evaluator, mode)
}

pub fn greedy_from(start: GameState, evaluator: &dyn Evaluator, mode: GreedyMode) -> Result<GameState, HarnessError> {
    let mut state = start;
    while !state.is_terminal() {
        let legal = state.legal_actions()?;
        let pick = match mode {
            GreedyMode::Policy => {
                let verdict = evaluator.evaluate_one(&state)?;
                let positions: Vec<usize> = legal.iter().map(|a| a.position).collect();
                let policy = mask_and_renormalize(&verdict.policy, &positions)?;
                first_max(legal.iter().map(|a| policy[a.position]))
            }
            GreedyMode::Value => {
                let successors = legal
                    .iter()
                    .map(|&a| state.apply(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let verdicts = evaluator.evaluate(&successors)?;
                first_max(verdicts.iter().map(|v| v.value))
            }
        };
        state = state.apply(legal[pick])?;
    }
    Ok(state)
}

fn first_max(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// `k` patch orders drawn from `seed`, pairwise distinct while the order
/// space allows it. With central hints the center patch comes first.
pub fn attempt_orders(instance: &PuzzleInstance, k: usize, seed: u64, hint_kind: HintKind) -> Vec<PatchOrder> {
    let f = instance.spec().patches();
    let center_patch = match hint_kind {
        HintKind::Central => instance.spec().center_position().map(|c| instance.solution()[c]),
        _ => None,
    };
    let free = if center_patch.is_some() { f - 1 } else { f };
    let available = (1..=free).try_fold(1usize, |acc, x| acc.checked_mul(x)).unwrap_or(usize::MAX);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut orders = Vec::with_capacity(k);
    while orders.len() < k {
        let mut order: Vec<usize> = (0..f).collect();
        order.shuffle(&mut rng);
        if let Some(c) = center_patch {
            let at = order.iter().position(|&p| p == c).expect("permutation");
            order.remove(at);
            order.insert(0, c);
        }
        if seen.len() < available && !seen.insert(order.clone()) {
            continue;
        }
        orders.push(PatchOrder::new(order).expect("shuffled permutation"));
    }
    orders
}

/// The first `hints` patches of `order`, placed at their solution positions.
pub fn hinted_start(instance: &PuzzleInstance, order: &PatchOrder, hints: usize) -> Result<GameState, HarnessError> {
    let moves: Vec<usize> = order.as_slice()[..hints]
        .iter()
        .map(|&p| instance.solution_position(p))
        .collect();
    Ok(GameState::from_moves(instance, order, &moves)?)
}

/// One full game from `start` with the configured solver.
pub fn play_once(
    start: GameState,
    instance: &PuzzleInstance,
    evaluator: &dyn Evaluator,
    settings: &SolveSettings,
) -> Result<GameOutcome, HarnessError> {
    match settings.solver {
        SolverMode::Mcts => Ok(play_from(start, instance, evaluator, &settings.search)?),
        SolverMode::GreedyPolicy | SolverMode::GreedyValue => {
            let mode = if settings.solver == SolverMode::GreedyPolicy {
                GreedyMode::Policy
            } else {
                GreedyMode::Value
            };
            Ok(GameOutcome {
                terminal: greedy_from(start, evaluator, mode)?,
                moves: Vec::new(),
            })
        }
    }
}

/// Solves `instance` once per order in `orders` and picks one attempt.
pub fn solve_orders(
    instance: &PuzzleInstance,
    orders: Vec<PatchOrder>,
    evaluator: &dyn Evaluator,
    settings: &SolveSettings,
) -> Result<AttemptsOutcome, HarnessError> {
    if orders.is_empty() {
        return Err(HarnessError::Config("attempts must be >= 1".into()));
    }
    let mut attempts = Vec::with_capacity(orders.len());
    for order in orders {
        let start = hinted_start(instance, &order, settings.hints)?;
        let terminal = play_once(start, instance, evaluator, settings)?.terminal;
        let metrics = compute_metrics(&terminal, instance)?;
        let predicted = evaluator.evaluate_one(&terminal)?.value;
        attempts.push(Attempt {
            order,
            terminal,
            metrics,
            predicted,
        });
    }
    let chosen = select_attempt(&attempts, settings.selection);
    Ok(AttemptsOutcome { attempts, chosen })
}

/// [`solve_orders`] over `settings.attempts` distinct seeded orders.
pub fn solve_with_attempts(
    instance: &PuzzleInstance,
    evaluator: &dyn Evaluator,
    settings: &SolveSettings,
    order_seed: u64,
) -> Result<AttemptsOutcome, HarnessError> {
    let orders = attempt_orders(instance, settings.attempts, order_seed, settings.hint_kind);
    solve_orders(instance, orders, evaluator, settings)
}

fn gt_key(m: &ReassemblyMetrics) -> (u8, f64, f64) {
    (m.puzzle_wise, m.patch_wise, m.neighbor_wise)
}

/// Index of the chosen attempt; the earliest wins ties.
pub fn select_attempt(attempts: &[Attempt], rule: AttemptSelection) -> usize {
    let mut chosen = 0;
    for (i, a) in attempts.iter().enumerate().skip(1) {
        let c = &attempts[chosen];
        let better = match rule {
            AttemptSelection::ValueHead => a.predicted > c.predicted,
            AttemptSelection::GroundTruthBest => gt_key(&a.metrics) > gt_key(&c.metrics),
            AttemptSelection::GroundTruthWorst => gt_key(&a.metrics) < gt_key(&c.metrics),
        };
        if better {
            chosen = i;
        }
    }
    chosen
}

/// How a complete assignment is scored by the exhaustive oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scorer {
    /// 1 for the solution, 0 otherwise.
    GroundTruth,
    /// The evaluator's value of the complete canvas.
    ValueHead,
}

/// Largest leaf count [`brute_force_solve`] accepts by default: `9!`.
pub const DEFAULT_LEAF_CAP: usize = 362_880;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    /// Patch at each position.
    pub assignment: Vec<usize>,
    pub score: f64,
    /// Complete assignments scored.
    pub leaves: usize,
}

/// Scores every complete assignment reachable with `order` and returns the
/// best, the lexicographically smallest assignment on ties.
pub fn brute_force_solve(
    instance: &PuzzleInstance,
    order: &PatchOrder,
    scorer: Scorer,
    evaluator: &dyn Evaluator,
    cap: usize,
) -> Result<BruteForce, HarnessError> {
    let f = instance.spec().patches();
    let leaves = (1..=f).try_fold(1usize, |acc, x| acc.checked_mul(x));
    match leaves {
        Some(n) if n <= cap => {}
        _ => return Err(HarnessError::CapExceeded { patches: f, cap }),
    }

    const CHUNK: usize = 4096;
    let mut assignment: Vec<usize> = (0..f).collect();
    let mut best = BruteForce {
        assignment: assignment.clone(),
        score: f64::NEG_INFINITY,
        leaves: 0,
    };
    let mut batch: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
    let flush = |batch: &mut Vec<Vec<usize>>, best: &mut BruteForce| -> Result<(), HarnessError> {
        let scores: Vec<f64> = match scorer {
            Scorer::GroundTruth => batch
                .iter()
                .map(|a| if a.as_slice() == instance.solution() { 1.0 } else { 0.0 })
                .collect(),
            Scorer::ValueHead => {
                let states = batch
                    .iter()
                    .map(|a| terminal_state(instance, order, a))
                    .collect::<Result<Vec<_>, _>>()?;
                evaluator.evaluate(&states)?.into_iter().map(|v| v.value).collect()
            }
        };
        for (a, s) in batch.drain(..).zip(scores) {
            best.leaves += 1;
            if s > best.score {
                best.score = s;
                best.assignment = a;
            }
        }
        Ok(())
    };
    loop {
        batch.push(assignment.clone());
        if batch.len() == CHUNK {
            flush(&mut batch, &mut best)?;
        }
        if !next_permutation(&mut assignment) {
            break;
        }
    }
    flush(&mut batch, &mut best)?;
    Ok(best)
}

/// The terminal state that puts each patch where `assignment` says.
pub fn terminal_state(instance: &PuzzleInstance, order: &PatchOrder, assignment: &[usize]) -> Result<GameState, HarnessError> {
    let mut position_of = vec![0; assignment.len()];
    for (pos, &patch) in assignment.iter().enumerate() {
        position_of[patch] = pos;
    }
    let moves: Vec<usize> = order.as_slice().iter().map(|&p| position_of[p]).collect();
    Ok(GameState::from_moves(instance, order, &moves)?)
}

/// Advances to the next permutation in lexicographic order; false after the
/// last one.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}
