//! Single-player Monte-Carlo tree search.
//!
//! [`run_search`] runs one move's budget and returns the root statistics;
//! [`play_game`] repeats it until the board is full.

mod config;
mod play;
mod search;
mod select;
mod tree;

pub use config::{ActionChoice, RewardMode, SearchConfig, Selection, MIDGAME_FALLBACK_VALUE};
pub use play::{play_from, play_game, GameOutcome, MoveRecord};
pub use search::{choose_action, run_search, SearchResult, SearchStats, SearchTree};
pub use select::{edge_score, select_edge, select_score};
pub use tree::{backpropagate, Edge, EdgeStats, Node, NodeId, Tree};

use thiserror::Error;

use crate::env::EnvError;
use crate::eval::EvalError;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
    #[error("search root is terminal")]
    TerminalRoot,
    #[error(transparent)]
    Evaluator(#[from] EvalError),
    #[error(transparent)]
    Env(#[from] EnvError),
}
