//! Policy/value evaluators.
//!
//! Every evaluator is batch-first: it maps a slice of states to one
//! [`Verdict`] each. Synthetic heads are stateless and fully concurrent;
//! remote ones are exclusive and go through a [`DispatchQueue`] when shared.

mod dispatch;
mod remote;
mod synthetic;
mod verdict;
pub mod wire;

pub use dispatch::{DispatchHandle, DispatchQueue};
pub use remote::{RemoteEvaluator, MAX_REMOTE_BATCH};
pub use synthetic::{PolicyHead, SyntheticEvaluator, ValueHead};
pub use verdict::{mask_and_renormalize, Verdict};

use std::sync::Arc;

use thiserror::Error;

use crate::env::GameState;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("evaluator unreachable: {0}")]
    Unreachable(String),
    #[error("malformed evaluator response: {0}")]
    Malformed(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("protocol version mismatch: {0}")]
    VersionMismatch(String),
    #[error("no legal action to renormalize over")]
    EmptyLegalSet,
    #[error("evaluator config: {0}")]
    Config(String),
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Unreachable(e.to_string())
    }
}

pub trait Evaluator: Send + Sync {
    fn evaluate(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError>;

    /// Exclusive evaluators must not be called from several threads at once
    /// without a dispatch queue in front.
    fn is_exclusive(&self) -> bool {
        false
    }

    fn evaluate_one(&self, state: &GameState) -> Result<Verdict, EvalError> {
        let mut v = self.evaluate(std::slice::from_ref(state))?;
        v.pop()
            .filter(|_| v.is_empty())
            .ok_or_else(|| EvalError::Malformed("expected exactly one verdict".into()))
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Arc<E> {
    fn evaluate(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError> {
        (**self).evaluate(states)
    }

    fn is_exclusive(&self) -> bool {
        (**self).is_exclusive()
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError> {
        (**self).evaluate(states)
    }

    fn is_exclusive(&self) -> bool {
        (**self).is_exclusive()
    }
}
