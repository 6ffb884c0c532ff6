use serde::{Deserialize, Serialize};

use super::EnvError;

/// Color channels carried by every patch.
pub const IMAGE_CHANNELS: usize = 3;

/// Geometry of a puzzle family.
///
/// Patches sit on an `n × n` grid of cells separated by zero-valued gap bands,
/// so the canvas side is `n·patch_size + (n−1)·gap_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PuzzleSpec {
    patch_size: usize,
    patches_per_side: usize,
    gap_size: usize,
    channels: usize,
}

impl PuzzleSpec {
    /// A three-channel spec.
    pub fn new(patch_size: usize, patches_per_side: usize, gap_size: usize) -> Result<Self, EnvError> {
        Self::with_channels(patch_size, patches_per_side, gap_size, IMAGE_CHANNELS)
    }

    /// `channels` is 3, or 4 to append an occupancy plane to the canvas.
    pub fn with_channels(
        patch_size: usize,
        patches_per_side: usize,
        gap_size: usize,
        channels: usize,
    ) -> Result<Self, EnvError> {
        if patch_size == 0 {
            return Err(EnvError::InvalidSpec("patch_size must be >= 1"));
        }
        if patches_per_side < 2 {
            return Err(EnvError::InvalidSpec("patches_per_side must be >= 2"));
        }
        if channels != 3 && channels != 4 {
            return Err(EnvError::InvalidSpec("channels must be 3 or 4"));
        }
        Ok(Self {
            patch_size,
            patches_per_side,
            gap_size,
            channels,
        })
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn patches_per_side(&self) -> usize {
        self.patches_per_side
    }

    pub fn gap_size(&self) -> usize {
        self.gap_size
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn has_occupancy_plane(&self) -> bool {
        self.channels == 4
    }

    /// Number of board positions `p`.
    pub fn positions(&self) -> usize {
        self.patches_per_side * self.patches_per_side
    }

    /// Number of patches `f`. Always equal to `positions()` for square puzzles.
    pub fn patches(&self) -> usize {
        self.positions()
    }

    /// Maximum game length, `min(p, f)`.
    pub fn max_turns(&self) -> usize {
        self.positions().min(self.patches())
    }

    pub fn canvas_side(&self) -> usize {
        let n = self.patches_per_side;
        n * self.patch_size + (n - 1) * self.gap_size
    }

    /// Distance between the top-left corners of neighboring cells.
    pub fn stride(&self) -> usize {
        self.patch_size + self.gap_size
    }

    /// Floats in one patch (always three channels).
    pub fn patch_len(&self) -> usize {
        self.patch_size * self.patch_size * IMAGE_CHANNELS
    }

    /// Top-left pixel `(row, col)` of a position's cell on the canvas.
    pub fn cell_origin(&self, position: usize) -> (usize, usize) {
        let n = self.patches_per_side;
        let (r, c) = (position / n, position % n);
        (r * self.stride(), c * self.stride())
    }

    /// Grid coordinates `(row, col)` of a position.
    pub fn grid_coords(&self, position: usize) -> (usize, usize) {
        (
            position / self.patches_per_side,
            position % self.patches_per_side,
        )
    }

    /// Center position, when the side count is odd.
    pub fn center_position(&self) -> Option<usize> {
        let n = self.patches_per_side;
        (n % 2 == 1).then(|| (n / 2) * n + n / 2)
    }

    /// Unordered adjacent position pairs, each listed as (left, right) or
    /// (top, bottom). There are `2n(n−1)` of them.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.patches_per_side;
        let mut pairs = Vec::with_capacity(2 * n * (n - 1));
        for r in 0..n {
            for c in 0..n {
                let p = r * n + c;
                if c + 1 < n {
                    pairs.push((p, p + 1));
                }
                if r + 1 < n {
                    pairs.push((p, p + n));
                }
            }
        }
        pairs
    }
}

impl Default for PuzzleSpec {
    fn default() -> Self {
        Self {
            patch_size: 40,
            patches_per_side: 3,
            gap_size: 4,
            channels: IMAGE_CHANNELS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canvas_side_follows_layout() {
        assert_eq!(PuzzleSpec::new(40, 3, 4).unwrap().canvas_side(), 128);
        assert_eq!(PuzzleSpec::new(96, 3, 48).unwrap().canvas_side(), 384);
        let small = PuzzleSpec::new(40, 2, 0).unwrap();
        assert_eq!(small.canvas_side(), 80);
        assert_eq!(small.patches(), 4);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(PuzzleSpec::new(0, 3, 4).is_err());
        assert!(PuzzleSpec::new(40, 1, 4).is_err());
        assert!(PuzzleSpec::with_channels(40, 3, 4, 2).is_err());
    }

    #[test]
    fn adjacency_count() {
        for n in 2..7 {
            let spec = PuzzleSpec::new(4, n, 1).unwrap();
            assert_eq!(spec.adjacent_pairs().len(), 2 * n * (n - 1));
        }
    }

    #[test]
    fn center_only_for_odd_sides() {
        assert_eq!(PuzzleSpec::new(4, 3, 0).unwrap().center_position(), Some(4));
        assert_eq!(PuzzleSpec::new(4, 4, 0).unwrap().center_position(), None);
    }
}
