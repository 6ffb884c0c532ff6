//! Game states and transitions.
//!
//! A state keeps the placement map and turn index; the canvas is a pure
//! function of those plus the shared patch pixels and is materialized on
//! demand by [`GameState::canvas`]. Cloning a state is cheap.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::geometry::{PuzzleSpec, IMAGE_CHANNELS};
use super::instance::{PatchSet, PuzzleInstance};
use super::EnvError;

/// Fixed sequence in which patches are handed to the agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatchOrder(Vec<usize>);

impl PatchOrder {
    pub fn new(order: Vec<usize>) -> Result<Self, EnvError> {
        let mut seen = vec![false; order.len()];
        for &i in &order {
            if i >= order.len() || std::mem::replace(&mut seen[i], true) {
                return Err(EnvError::InvalidOrder);
            }
        }
        Ok(Self(order))
    }

    pub fn identity(f: usize) -> Self {
        Self((0..f).collect())
    }

    pub fn shuffled(f: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..f).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Place the next patch at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub position: usize,
}

impl Action {
    pub fn new(position: usize) -> Self {
        Self { position }
    }
}

/// Pixel tensor of shape `side × side × channels`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    side: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Canvas {
    pub fn zeros(side: usize, channels: usize) -> Self {
        Self {
            side,
            channels,
            data: vec![0.0; side * side * channels],
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.data[(row * self.side + col) * self.channels + channel]
    }

    fn set(&mut self, row: usize, col: usize, channel: usize, v: f32) {
        self.data[(row * self.side + col) * self.channels + channel] = v;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    patches: Arc<PatchSet>,
    order: Arc<PatchOrder>,
    assignment: Vec<Option<usize>>,
    turn: usize,
}

impl GameState {
    /// Empty board, first patch of `order` up next.
    pub fn initial(instance: &PuzzleInstance, order: &PatchOrder) -> Result<Self, EnvError> {
        Self::initial_with(Arc::clone(instance.patches()), Arc::new(order.clone()))
    }

    pub fn initial_with(patches: Arc<PatchSet>, order: Arc<PatchOrder>) -> Result<Self, EnvError> {
        if order.len() != patches.len() {
            return Err(EnvError::InvalidOrder);
        }
        let positions = patches.spec().positions();
        Ok(Self {
            patches,
            order,
            assignment: vec![None; positions],
            turn: 0,
        })
    }

    /// Replays `positions` from the initial state.
    pub fn from_moves(
        instance: &PuzzleInstance,
        order: &PatchOrder,
        positions: &[usize],
    ) -> Result<Self, EnvError> {
        positions
            .iter()
            .try_fold(Self::initial(instance, order)?, |s, &p| s.apply(Action::new(p)))
    }

    pub fn spec(&self) -> &PuzzleSpec {
        self.patches.spec()
    }

    pub fn patches(&self) -> &Arc<PatchSet> {
        &self.patches
    }

    pub fn order(&self) -> &PatchOrder {
        &self.order
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    /// `assignment()[position]` is the patch placed there, if any.
    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    /// Placement map with `-1` marking empty positions.
    pub fn assignment_i32(&self) -> Vec<i32> {
        self.assignment
            .iter()
            .map(|a| a.map_or(-1, |p| p as i32))
            .collect()
    }

    pub fn placed_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    /// Patches still waiting in the queue.
    pub fn remaining(&self) -> usize {
        self.order.len() - self.turn
    }

    pub fn next_patch(&self) -> Option<usize> {
        self.order.as_slice().get(self.turn).copied()
    }

    pub fn is_terminal(&self) -> bool {
        self.next_patch().is_none() || self.assignment.iter().all(Option::is_some)
    }

    /// Empty positions in ascending order.
    pub fn legal_actions(&self) -> Result<Vec<Action>, EnvError> {
        if self.is_terminal() {
            return Err(EnvError::TerminalState);
        }
        Ok(self.empty_positions().map(Action::new).collect())
    }

    pub(crate) fn empty_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_none())
            .map(|(p, _)| p)
    }

    pub fn is_legal(&self, action: Action) -> bool {
        !self.is_terminal() && self.assignment.get(action.position) == Some(&None)
    }

    /// Successor state; `self` is left untouched.
    pub fn apply(&self, action: Action) -> Result<GameState, EnvError> {
        let patch = self.next_patch().ok_or(EnvError::TerminalState)?;
        if self.is_terminal() {
            return Err(EnvError::TerminalState);
        }
        match self.assignment.get(action.position) {
            None => return Err(EnvError::PositionOutOfRange(action.position)),
            Some(Some(_)) => return Err(EnvError::OccupiedPosition(action.position)),
            Some(None) => {}
        }
        let mut next = self.clone();
        next.assignment[action.position] = Some(patch);
        next.turn += 1;
        Ok(next)
    }

    /// Renders the partial reassembly: placed patches in their cells, zero
    /// everywhere else, plus the occupancy plane when the spec asks for one.
    pub fn canvas(&self) -> Canvas {
        let spec = *self.spec();
        let mut canvas = Canvas::zeros(spec.canvas_side(), spec.channels());
        let ps = spec.patch_size();
        for (position, patch) in self.assignment.iter().enumerate() {
            let Some(patch) = *patch else { continue };
            let pixels = self.patches.patch(patch);
            let (top, left) = spec.cell_origin(position);
            for r in 0..ps {
                for c in 0..ps {
                    let src = (r * ps + c) * IMAGE_CHANNELS;
                    for ch in 0..IMAGE_CHANNELS {
                        canvas.set(top + r, left + c, ch, pixels[src + ch]);
                    }
                    if spec.has_occupancy_plane() {
                        canvas.set(top + r, left + c, IMAGE_CHANNELS, 1.0);
                    }
                }
            }
        }
        canvas
    }
}
