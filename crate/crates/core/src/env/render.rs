//! PNG output and image ingestion.
//!
//! Rendering de-normalizes placed patches to 8-bit RGB. Empty cells and gap
//! bands are painted black so partial reassemblies read as such; the
//! occupancy plane, if any, is dropped.

use std::path::Path;

use image::{ImageBuffer, Rgb, RgbImage};

use super::geometry::IMAGE_CHANNELS;
use super::instance::SourceImage;
use super::state::GameState;
use super::EnvError;

pub fn denormalize(v: f32) -> u8 {
    ((v + 1.0) * 0.5 * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn canvas_image(state: &GameState) -> RgbImage {
    let spec = *state.spec();
    let canvas = state.canvas();
    let side = spec.canvas_side() as u32;
    let mut img: RgbImage = ImageBuffer::from_pixel(side, side, Rgb([0, 0, 0]));
    let ps = spec.patch_size();
    for (position, placed) in state.assignment().iter().enumerate() {
        if placed.is_none() {
            continue;
        }
        let (top, left) = spec.cell_origin(position);
        for r in top..top + ps {
            for c in left..left + ps {
                let mut px = [0u8; IMAGE_CHANNELS];
                for (ch, out) in px.iter_mut().enumerate() {
                    *out = denormalize(canvas.get(r, c, ch));
                }
                img.put_pixel(c as u32, r as u32, Rgb(px));
            }
        }
    }
    img
}

pub fn render_canvas(state: &GameState, path: &Path) -> Result<(), EnvError> {
    canvas_image(state)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| EnvError::Image(e.to_string()))
}

/// Writes a source image as 8-bit PNG.
pub fn save_image(image: &SourceImage, path: &Path) -> Result<(), EnvError> {
    let bytes: Vec<u8> = image.data().iter().map(|&v| denormalize(v)).collect();
    let img = RgbImage::from_raw(image.width() as u32, image.height() as u32, bytes)
        .ok_or_else(|| EnvError::Image("image buffer size mismatch".into()))?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| EnvError::Image(format!("{}: {e}", path.display())))
}

/// Loads a PNG or PPM file as a normalized RGB image.
pub fn load_image(path: &Path) -> Result<SourceImage, EnvError> {
    let img = image::open(path)
        .map_err(|e| EnvError::Image(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    SourceImage::from_rgb8(w as usize, h as usize, img.as_raw())
}

/// Image files (`png`, `ppm`, `pnm`) in a directory, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<std::path::PathBuf>, EnvError> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "ppm" | "pnm"))
        })
        .collect();
    files.sort();
    Ok(files)
}
