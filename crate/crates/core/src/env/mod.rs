//! The jigsaw environment: instances, states, transitions and scoring.

mod geometry;
mod instance;
mod metrics;
mod render;
mod sampler;
mod state;
mod synth;

pub use geometry::{PuzzleSpec, IMAGE_CHANNELS};
pub use instance::{
    cut_crop, normalize_u8, slice_image, PatchSet, PuzzleInstance, SourceImage, RECORD_MAGIC,
    RECORD_VERSION,
};
pub use metrics::{
    compute_metrics, correct_prefix_value, ground_truth_reward, value_target, well_placed,
    ReassemblyMetrics,
};
pub use render::{canvas_image, denormalize, list_images, load_image, render_canvas, save_image};
pub use sampler::{sample_partial_state, HintKind};
pub use state::{Action, Canvas, GameState, PatchOrder};
pub use synth::synthetic_image;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("invalid puzzle spec: {0}")]
    InvalidSpec(&'static str),
    #[error("image is {width}x{height}, needs at least {required}x{required}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        required: usize,
    },
    #[error("patch order is not a permutation of the patch indices")]
    InvalidOrder,
    #[error("state is terminal")]
    TerminalState,
    #[error("state is not terminal")]
    NonTerminalState,
    #[error("position {0} is already occupied")]
    OccupiedPosition(usize),
    #[error("position {0} is out of range")]
    PositionOutOfRange(usize),
    #[error("{hints} hints requested for a {patches}-patch puzzle")]
    HintsOutOfRange { hints: usize, patches: usize },
    #[error("puzzle has no center position")]
    NoCenter,
    #[error("malformed data: {0}")]
    Format(String),
    #[error("image error: {0}")]
    Image(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for EnvError {
    fn from(e: std::io::Error) -> Self {
        EnvError::Io(e.to_string())
    }
}
