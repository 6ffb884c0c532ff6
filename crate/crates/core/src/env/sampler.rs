//! Partial states with pre-placed "hint" patches.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::instance::PuzzleInstance;
use super::metrics::well_placed;
use super::state::{Action, GameState, PatchOrder};
use super::EnvError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HintKind {
    /// Every hint sits at its solution position.
    Correct,
    /// At least one hint is misplaced.
    Flawed,
    /// Correct hints, the first of which is the center patch (odd sides only).
    Central,
}

/// Samples a state with exactly `hints` placed patches. The hinted patches
/// are the head of a seeded random order, so play continues along it.
pub fn sample_partial_state(
    instance: &PuzzleInstance,
    hints: usize,
    kind: HintKind,
    seed: u64,
) -> Result<GameState, EnvError> {
    let spec = instance.spec();
    let f = spec.patches();
    if hints >= f {
        return Err(EnvError::HintsOutOfRange { hints, patches: f });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..f).collect();
    order.shuffle(&mut rng);

    match kind {
        HintKind::Correct => {
            let order = PatchOrder::new(order)?;
            let moves: Vec<usize> = order.as_slice()[..hints]
                .iter()
                .map(|&p| instance.solution_position(p))
                .collect();
            GameState::from_moves(instance, &order, &moves)
        }
        HintKind::Central => {
            let center = spec.center_position().ok_or(EnvError::NoCenter)?;
            if hints == 0 {
                return Err(EnvError::HintsOutOfRange { hints, patches: f });
            }
            let center_patch = instance.solution()[center];
            let at = order.iter().position(|&p| p == center_patch).expect("permutation");
            order.swap(0, at);
            let order = PatchOrder::new(order)?;
            let moves: Vec<usize> = order.as_slice()[..hints]
                .iter()
                .map(|&p| instance.solution_position(p))
                .collect();
            GameState::from_moves(instance, &order, &moves)
        }
        HintKind::Flawed => {
            if hints == 0 {
                return Err(EnvError::HintsOutOfRange { hints, patches: f });
            }
            let order = Arc::new(PatchOrder::new(order)?);
            loop {
                let mut positions: Vec<usize> = (0..spec.positions()).collect();
                positions.shuffle(&mut rng);
                let mut state = GameState::initial_with(Arc::clone(instance.patches()), Arc::clone(&order))?;
                for &p in &positions[..hints] {
                    state = state.apply(Action::new(p))?;
                }
                if well_placed(&state, instance) < hints {
                    return Ok(state);
                }
            }
        }
    }
}
