//! Ground-truth puzzles: source images, patch extraction and the `AZPZ`
//! binary record.
//!
//! Record layout (all integers little-endian):
//!
//! ```text
//! "AZPZ"  u16 version
//! u32 patch_size  u32 patches_per_side  u32 gap_size  u32 channels
//! u32 source_id byte length, UTF-8 source_id
//! f patches × (patch_size² × 3) f32, row-major, channels interleaved
//! p × (u32 position, u32 patch index)
//! ```

use std::io::{Read, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{PuzzleSpec, IMAGE_CHANNELS};
use super::EnvError;

pub const RECORD_MAGIC: &[u8; 4] = b"AZPZ";
pub const RECORD_VERSION: u16 = 1;

/// An RGB image with values normalized to `[-1, 1]`, row-major, channels
/// interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl SourceImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, EnvError> {
        if data.len() != width * height * IMAGE_CHANNELS {
            return Err(EnvError::Format(format!(
                "expected {} floats for a {width}x{height} image, got {}",
                width * height * IMAGE_CHANNELS,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Normalizes 8-bit RGB samples to `[-1, 1]`.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, EnvError> {
        let data = bytes.iter().map(|&b| normalize_u8(b)).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f32] {
        let i = (row * self.width + col) * IMAGE_CHANNELS;
        &self.data[i..i + IMAGE_CHANNELS]
    }

    /// Copies the `side × side` window at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, side: usize) -> SourceImage {
        let mut data = Vec::with_capacity(side * side * IMAGE_CHANNELS);
        for r in top..top + side {
            let start = (r * self.width + left) * IMAGE_CHANNELS;
            data.extend_from_slice(&self.data[start..start + side * IMAGE_CHANNELS]);
        }
        SourceImage {
            width: side,
            height: side,
            data,
        }
    }
}

pub fn normalize_u8(b: u8) -> f32 {
    f32::from(b) / 255.0 * 2.0 - 1.0
}

/// Patch pixels shared by an instance and every state derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    spec: PuzzleSpec,
    patches: Vec<Vec<f32>>,
}

impl PatchSet {
    pub fn new(spec: PuzzleSpec, patches: Vec<Vec<f32>>) -> Result<Self, EnvError> {
        if patches.len() != spec.patches() {
            return Err(EnvError::Format(format!(
                "expected {} patches, got {}",
                spec.patches(),
                patches.len()
            )));
        }
        for p in &patches {
            if p.len() != spec.patch_len() {
                return Err(EnvError::Format(format!(
                    "patch has {} floats, expected {}",
                    p.len(),
                    spec.patch_len()
                )));
            }
            if p.iter().any(|v| !(-1.0..=1.0).contains(v)) {
                return Err(EnvError::Format("pixel value outside [-1, 1]".into()));
            }
        }
        Ok(Self { spec, patches })
    }

    pub fn spec(&self) -> &PuzzleSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch(&self, index: usize) -> &[f32] {
        &self.patches[index]
    }
}

/// One ground-truth puzzle.
#[derive(Debug, Clone, PartialEq)]
pub struct PuzzleInstance {
    patches: Arc<PatchSet>,
    solution: Vec<usize>,
    source_id: String,
}

impl PuzzleInstance {
    /// `solution[position]` is the patch index that belongs there.
    pub fn new(
        patches: PatchSet,
        solution: Vec<usize>,
        source_id: impl Into<String>,
    ) -> Result<Self, EnvError> {
        let f = patches.len();
        if solution.len() != patches.spec().positions() {
            return Err(EnvError::Format("solution length differs from position count".into()));
        }
        let mut seen = vec![false; f];
        for &patch in &solution {
            if patch >= f || std::mem::replace(&mut seen[patch], true) {
                return Err(EnvError::Format("solution is not a bijection".into()));
            }
        }
        Ok(Self {
            patches: Arc::new(patches),
            solution,
            source_id: source_id.into(),
        })
    }

    pub fn spec(&self) -> &PuzzleSpec {
        self.patches.spec()
    }

    pub fn patches(&self) -> &Arc<PatchSet> {
        &self.patches
    }

    pub fn solution(&self) -> &[usize] {
        &self.solution
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Position where `patch` belongs.
    pub fn solution_position(&self, patch: usize) -> usize {
        self.solution
            .iter()
            .position(|&p| p == patch)
            .expect("solution is a bijection")
    }

    pub fn write_record<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let spec = self.spec();
        w.write_all(RECORD_MAGIC)?;
        w.write_all(&RECORD_VERSION.to_le_bytes())?;
        for field in [
            spec.patch_size(),
            spec.patches_per_side(),
            spec.gap_size(),
            spec.channels(),
        ] {
            w.write_all(&(field as u32).to_le_bytes())?;
        }
        let id = self.source_id.as_bytes();
        w.write_all(&(id.len() as u32).to_le_bytes())?;
        w.write_all(id)?;
        for i in 0..self.patches.len() {
            for v in self.patches.patch(i) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for (position, &patch) in self.solution.iter().enumerate() {
            w.write_all(&(position as u32).to_le_bytes())?;
            w.write_all(&(patch as u32).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_record_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_record(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_record<R: Read>(mut r: R) -> Result<Self, EnvError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != RECORD_MAGIC {
            return Err(EnvError::Format("bad instance magic".into()));
        }
        let version = read_u16(&mut r)?;
        if version != RECORD_VERSION {
            return Err(EnvError::Format(format!("unsupported record version {version}")));
        }
        let patch_size = read_u32(&mut r)? as usize;
        let per_side = read_u32(&mut r)? as usize;
        let gap = read_u32(&mut r)? as usize;
        let channels = read_u32(&mut r)? as usize;
        let spec = PuzzleSpec::with_channels(patch_size, per_side, gap, channels)?;
        let id_len = read_u32(&mut r)? as usize;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id)?;
        let source_id =
            String::from_utf8(id).map_err(|_| EnvError::Format("source id is not UTF-8".into()))?;
        let mut patches = Vec::with_capacity(spec.patches());
        for _ in 0..spec.patches() {
            let mut patch = Vec::with_capacity(spec.patch_len());
            for _ in 0..spec.patch_len() {
                patch.push(f32::from_bits(read_u32(&mut r)?));
            }
            patches.push(patch);
        }
        let mut solution = vec![usize::MAX; spec.positions()];
        for _ in 0..spec.positions() {
            let position = read_u32(&mut r)? as usize;
            let patch = read_u32(&mut r)? as usize;
            if position >= solution.len() {
                return Err(EnvError::Format("solution position out of range".into()));
            }
            solution[position] = patch;
        }
        Self::new(PatchSet::new(spec, patches)?, solution, source_id)
    }
}

fn read_u16<R: Read>(r: &mut R) -> std::io::Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Picks a seeded random `canvas_side²` crop of `image` and cuts it into
/// patches. Gap bands between cells are discarded; the solution is the
/// identity placement.
pub fn slice_image(
    image: &SourceImage,
    spec: PuzzleSpec,
    crop_seed: u64,
    source_id: impl Into<String>,
) -> Result<PuzzleInstance, EnvError> {
    let side = spec.canvas_side();
    if image.width() < side || image.height() < side {
        return Err(EnvError::ImageTooSmall {
            width: image.width(),
            height: image.height(),
            required: side,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crop_seed);
    let top = rng.gen_range(0..=image.height() - side);
    let left = rng.gen_range(0..=image.width() - side);
    let crop = image.crop(top, left, side);
    Ok(cut_crop(&crop, spec, source_id))
}

/// Cuts an exactly `canvas_side²` image into patches in row-major position
/// order.
pub fn cut_crop(crop: &SourceImage, spec: PuzzleSpec, source_id: impl Into<String>) -> PuzzleInstance {
    let ps = spec.patch_size();
    let patches = (0..spec.positions())
        .map(|pos| {
            let (top, left) = spec.cell_origin(pos);
            let mut patch = Vec::with_capacity(spec.patch_len());
            for r in top..top + ps {
                for c in left..left + ps {
                    patch.extend_from_slice(crop.pixel(r, c));
                }
            }
            patch
        })
        .collect();
    let patches = PatchSet::new(spec, patches).expect("crop pixels are normalized");
    PuzzleInstance::new(patches, (0..spec.positions()).collect(), source_id)
        .expect("identity placement is a bijection")
}
