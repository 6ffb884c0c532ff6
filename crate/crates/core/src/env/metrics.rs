//! Rewards, reassembly scores, and value targets.

use serde::{Deserialize, Serialize};

use super::instance::PuzzleInstance;
use super::state::GameState;
use super::EnvError;

/// Scores of a finished reassembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReassemblyMetrics {
    /// Fraction of positions holding their own patch.
    pub patch_wise: f64,
    /// Fraction of adjacent position pairs whose patches are ground-truth
    /// neighbors in the same arrangement.
    pub neighbor_wise: f64,
    /// 1 for an exact solve, 0 otherwise.
    pub puzzle_wise: u8,
}

/// Number of placed patches sitting at their solution position.
pub fn well_placed(state: &GameState, instance: &PuzzleInstance) -> usize {
    state
        .assignment()
        .iter()
        .zip(instance.solution())
        .filter(|(placed, truth)| **placed == Some(**truth))
        .count()
}

fn is_flawless(state: &GameState, instance: &PuzzleInstance) -> bool {
    well_placed(state, instance) == state.placed_count()
}

/// Binary solved-puzzle reward of a terminal state.
pub fn ground_truth_reward(state: &GameState, instance: &PuzzleInstance) -> Result<u8, EnvError> {
    if !state.is_terminal() {
        return Err(EnvError::NonTerminalState);
    }
    let exact = state
        .assignment()
        .iter()
        .zip(instance.solution())
        .all(|(placed, truth)| *placed == Some(*truth));
    Ok(u8::from(exact))
}

pub fn compute_metrics(
    state: &GameState,
    instance: &PuzzleInstance,
) -> Result<ReassemblyMetrics, EnvError> {
    let puzzle_wise = ground_truth_reward(state, instance)?;
    let spec = instance.spec();
    let patch_wise = well_placed(state, instance) as f64 / spec.positions() as f64;

    let pairs = spec.adjacent_pairs();
    let assignment = state.assignment();
    let matched = pairs
        .iter()
        .filter(|&&(a, b)| match (assignment[a], assignment[b]) {
            (Some(pa), Some(pb)) => {
                // Same relative offset on the solution grid as on the board.
                let (ra, ca) = spec.grid_coords(instance.solution_position(pa));
                let (rb, cb) = spec.grid_coords(instance.solution_position(pb));
                let (ba, bca) = spec.grid_coords(a);
                let (bb, bcb) = spec.grid_coords(b);
                rb as isize - ra as isize == bb as isize - ba as isize
                    && cb as isize - ca as isize == bcb as isize - bca as isize
            }
            _ => false,
        })
        .count();
    let neighbor_wise = matched as f64 / pairs.len() as f64;

    Ok(ReassemblyMetrics {
        patch_wise,
        neighbor_wise,
        puzzle_wise,
    })
}

/// Value of a flawless prefix holding `well_placed` of `patches` patches:
/// `0.5 + 0.5·i/(f−1)`.
pub fn correct_prefix_value(well_placed: usize, patches: usize) -> f64 {
    assert!(patches >= 2, "value target needs at least two patches");
    0.5 + 0.5 * well_placed as f64 / (patches - 1) as f64
}

/// Training target for the value head. Zero as soon as one placed patch is
/// misplaced; 1 for the solved puzzle; otherwise [`correct_prefix_value`].
pub fn value_target(state: &GameState, instance: &PuzzleInstance) -> f64 {
    if !is_flawless(state, instance) {
        return 0.0;
    }
    if state.is_terminal() {
        return 1.0;
    }
    correct_prefix_value(state.placed_count(), instance.spec().patches())
}
