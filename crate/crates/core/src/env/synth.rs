//! Seeded synthetic images: smooth color gradients and low-frequency waves
//! with a little pixel noise, so every crop is distinct.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::IMAGE_CHANNELS;
use super::instance::SourceImage;

const WAVES_PER_CHANNEL: usize = 3;
const PIXEL_NOISE: f32 = 0.05;

pub fn synthetic_image(width: usize, height: usize, seed: u64) -> SourceImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = width.max(height).max(1) as f32;

    // Per channel: offset, linear gradient, and a few plane waves.
    let channels: Vec<_> = (0..IMAGE_CHANNELS)
        .map(|_| {
            let offset = rng.gen_range(-0.3f32..0.3);
            let gx = rng.gen_range(-0.5f32..0.5);
            let gy = rng.gen_range(-0.5f32..0.5);
            let waves: Vec<(f32, f32, f32, f32)> = (0..WAVES_PER_CHANNEL)
                .map(|_| {
                    (
                        rng.gen_range(0.05f32..0.25),
                        rng.gen_range(-6.0f32..6.0),
                        rng.gen_range(-6.0f32..6.0),
                        rng.gen_range(0.0f32..std::f32::consts::TAU),
                    )
                })
                .collect();
            (offset, gx, gy, waves)
        })
        .collect();

    let mut data = Vec::with_capacity(width * height * IMAGE_CHANNELS);
    for r in 0..height {
        let y = r as f32 / scale;
        for c in 0..width {
            let x = c as f32 / scale;
            for (offset, gx, gy, waves) in &channels {
                let mut v = offset + gx * (x - 0.5) + gy * (y - 0.5);
                for &(amp, fx, fy, phase) in waves {
                    v += amp * (fx * x + fy * y + phase).sin();
                }
                v += rng.gen_range(-PIXEL_NOISE..PIXEL_NOISE);
                data.push(v.clamp(-1.0, 1.0));
            }
        }
    }
    SourceImage::new(width, height, data).expect("sized by construction")
}
