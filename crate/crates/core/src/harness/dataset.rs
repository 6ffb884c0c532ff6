//! Puzzle sets and per-puzzle seed streams.

use std::path::PathBuf;
use std::sync::Arc;

use crate::env::{list_images, load_image, slice_image, synthetic_image, PuzzleInstance, PuzzleSpec, SourceImage};

use super::config::DatasetSource;
use super::HarnessError;

/// Independent random streams drawn from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Image = 1,
    Crop = 2,
    Order = 3,
    Evaluator = 4,
    Hints = 5,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for puzzle `index` on `stream`. Distinct `(index, stream)` pairs get
/// unrelated seeds, and changing the puzzle count never reshuffles the
/// puzzles that were already there.
pub fn puzzle_seed(master: u64, index: usize, stream: Stream) -> u64 {
    mix(mix(mix(master) ^ index as u64) ^ stream as u64)
}

/// Extra border around the canvas in synthetic images, so crops vary.
const SYNTHETIC_MARGIN: usize = 32;

/// Where the instances of an experiment come from.
#[derive(Debug, Clone)]
pub struct Dataset {
    spec: PuzzleSpec,
    master_seed: u64,
    images: Option<Vec<PathBuf>>,
}

impl Dataset {
    pub fn open(source: &DatasetSource, spec: PuzzleSpec, master_seed: u64) -> Result<Self, HarnessError> {
        let images = match source {
            DatasetSource::Synthetic => None,
            DatasetSource::Directory(dir) => {
                let files = list_images(dir).map_err(|e| HarnessError::Dataset(format!("{}: {e}", dir.display())))?;
                if files.is_empty() {
                    return Err(HarnessError::Dataset(format!("{}: no PNG or PPM images", dir.display())));
                }
                Some(files)
            }
        };
        Ok(Self {
            spec,
            master_seed,
            images,
        })
    }

    pub fn spec(&self) -> PuzzleSpec {
        self.spec
    }

    /// Puzzle `index`. Directory images are reused cyclically with a fresh
    /// crop each time around.
    pub fn instance(&self, index: usize) -> Result<PuzzleInstance, HarnessError> {
        let crop_seed = puzzle_seed(self.master_seed, index, Stream::Crop);
        let (image, source_id): (SourceImage, String) = match &self.images {
            None => {
                let side = self.spec.canvas_side() + SYNTHETIC_MARGIN;
                let seed = puzzle_seed(self.master_seed, index, Stream::Image);
                (synthetic_image(side, side, seed), format!("synthetic:{seed:016x}"))
            }
            Some(files) => {
                let path = &files[index % files.len()];
                let image = load_image(path).map_err(|e| HarnessError::Dataset(format!("{}: {e}", path.display())))?;
                (image, path.display().to_string())
            }
        };
        slice_image(&image, self.spec, crop_seed, source_id).map_err(|e| HarnessError::Dataset(e.to_string()))
    }

    pub fn instances(&self, count: usize) -> Result<Vec<Arc<PuzzleInstance>>, HarnessError> {
        (0..count).map(|i| self.instance(i).map(Arc::new)).collect()
    }
}
