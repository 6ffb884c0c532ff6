//! Monte-Carlo tree search for square jigsaw puzzles.
//!
//! A puzzle is cut from an image into `n × n` patches. The agent receives
//! the patches one at a time in a fixed order and places each on an empty
//! board position. A policy/value [`eval::Evaluator`] guides the search.

pub mod env;
pub mod eval;
pub mod mcts;
pub mod harness;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/environment.md")]
    mod environment {}
    #[doc = include_str!("../../../book/src/evaluators.md")]
    mod evaluators {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/interfaces.md")]
    mod interfaces {}
}
