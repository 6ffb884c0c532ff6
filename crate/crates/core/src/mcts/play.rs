//! Full games: search, play the chosen move, repeat.

use crate::env::{value_target, GameState, PatchOrder, PuzzleInstance};
use crate::eval::Evaluator;

use super::config::SearchConfig;
use super::search::{SearchResult, SearchTree};
use super::SearchError;

/// What happened at one turn of a game.
#[derive(Debug, Clone)]
pub struct MoveRecord {
    /// State before the move.
    pub state: GameState,
    pub search: SearchResult,
    /// Where the patch to place belongs.
    pub target_position: usize,
    /// Value target of `state`.
    pub value_target: f64,
}

#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub terminal: GameState,
    pub moves: Vec<MoveRecord>,
}

pub fn play_game(
    instance: &PuzzleInstance,
    order: &PatchOrder,
    evaluator: &dyn Evaluator,
    config: &SearchConfig,
) -> Result<GameOutcome, SearchError> {
    play_from(GameState::initial(instance, order)?, instance, evaluator, config)
}

/// Plays from an arbitrary (for example partially hinted) state.
pub fn play_from(
    start: GameState,
    instance: &PuzzleInstance,
    evaluator: &dyn Evaluator,
    config: &SearchConfig,
) -> Result<GameOutcome, SearchError> {
    let mut tree = SearchTree::new(instance, evaluator, *config)?;
    let mut state = start;
    let mut moves = Vec::with_capacity(state.remaining());
    while !state.is_terminal() {
        let search = tree.search(&state)?;
        let next = state.apply(search.action)?;
        if config.tree_per_move {
            tree = SearchTree::new(instance, evaluator, *config)?;
        } else {
            tree.advance(search.action);
        }
        let patch = state.next_patch().expect("non-terminal state has a next patch");
        moves.push(MoveRecord {
            target_position: instance.solution_position(patch),
            value_target: value_target(&state, instance),
            state,
            search,
        });
        state = next;
    }
    Ok(GameOutcome {
        terminal: state,
        moves,
    })
}
