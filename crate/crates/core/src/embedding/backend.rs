//! Feature-extraction backends and the shared preprocessing contract.

use std::path::Path;

use image::imageops::FilterType;
use image::RgbImage;
use rayon::prelude::*;

use super::{EmbeddingError, EmbeddingMatrix};

/// Side length every backend receives.
pub const INPUT_SIZE: u32 = 224;

/// Decode, convert to 8-bit RGB and resize to 224×224.
///
/// Resizing ignores aspect ratio, so a 1×1 image becomes a uniform
/// 224×224 image. Pixel scaling is left to each backend.
pub fn preprocess(bytes: &[u8]) -> Result<RgbImage, EmbeddingError> {
    let img = image::load_from_memory(bytes).map_err(|e| EmbeddingError::Decode(e.to_string()))?;
    let rgb = img.to_rgb8();
    if rgb.width() == INPUT_SIZE && rgb.height() == INPUT_SIZE {
        return Ok(rgb);
    }
    Ok(image::imageops::resize(&rgb, INPUT_SIZE, INPUT_SIZE, FilterType::Triangle))
}

/// Maps image bytes to a fixed-length feature vector.
///
/// Implementations must be deterministic and hold no per-call state so that
/// [`extract_all`] can run them in parallel.
pub trait ExtractionBackend: Send + Sync {
    fn name(&self) -> &str;
    fn output_dim(&self) -> usize;
    fn extract(&self, bytes: &[u8]) -> Result<Vec<f32>, EmbeddingError>;
}

/// The default: no model runtime, embeddings must be loaded from disk.
#[derive(Debug, Default, Clone, Copy)]
pub struct PrecomputedOnly;

impl ExtractionBackend for PrecomputedOnly {
    fn name(&self) -> &str {
        "precomputed"
    }

    fn output_dim(&self) -> usize {
        0
    }

    fn extract(&self, _bytes: &[u8]) -> Result<Vec<f32>, EmbeddingError> {
        Err(EmbeddingError::BackendUnavailable(
            "no extraction backend configured; load precomputed embeddings instead".into(),
        ))
    }
}

/// Model-free descriptor on the 224×224 RGB input: per-cell channel means
/// on a 7×7 grid, an 8-bin histogram per channel and per-cell mean gradient
/// magnitude on the same grid. Values lie in [0, 1].
#[derive(Debug, Default, Clone, Copy)]
pub struct PooledColorBackend;

const GRID: usize = 7;
const BINS: usize = 8;

impl ExtractionBackend for PooledColorBackend {
    fn name(&self) -> &str {
        "pooled-rgb-v1"
    }

    fn output_dim(&self) -> usize {
        GRID * GRID * 3 + 3 * BINS + GRID * GRID
    }

    fn extract(&self, bytes: &[u8]) -> Result<Vec<f32>, EmbeddingError> {
        let img = preprocess(bytes)?;
        let side = INPUT_SIZE as usize;
        let cell = side / GRID;
        let mut means = vec![0f64; GRID * GRID * 3];
        let mut hist = vec![0f64; 3 * BINS];
        let mut grad = vec![0f64; GRID * GRID];
        let luma = |x: usize, y: usize| {
            let p = img.get_pixel(x as u32, y as u32).0;
            (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64) / 255.0
        };
        for y in 0..side {
            for x in 0..side {
                let p = img.get_pixel(x as u32, y as u32).0;
                let g = (y / cell).min(GRID - 1) * GRID + (x / cell).min(GRID - 1);
                for c in 0..3 {
                    means[g * 3 + c] += p[c] as f64 / 255.0;
                    hist[c * BINS + (p[c] as usize * BINS / 256)] += 1.0;
                }
                let gx = luma((x + 1).min(side - 1), y) - luma(x.saturating_sub(1), y);
                let gy = luma(x, (y + 1).min(side - 1)) - luma(x, y.saturating_sub(1));
                grad[g] += (gx * gx + gy * gy).sqrt() / 2.0;
            }
        }
        let cell_px = (cell * cell) as f64;
        let total_px = (side * side) as f64;
        let mut out = Vec::with_capacity(self.output_dim());
        // 224 = 7 × 32, so every cell has exactly cell_px pixels
        out.extend(means.iter().map(|v| (v / cell_px) as f32));
        out.extend(hist.iter().map(|v| (v / total_px) as f32));
        out.extend(grad.iter().map(|v| (v / cell_px).min(1.0) as f32));
        Ok(out)
    }
}

/// Extract every `(image_id, path)` in parallel, preserving input order.
pub fn extract_all<B: ExtractionBackend + ?Sized>(
    backend: &B,
    images: &[(String, std::path::PathBuf)],
) -> Result<EmbeddingMatrix<f32>, EmbeddingError> {
    let rows: Result<Vec<_>, EmbeddingError> = images
        .par_iter()
        .map(|(id, path)| {
            let bytes = read_image(path)?;
            let v = backend
                .extract(&bytes)
                .map_err(|e| EmbeddingError::Image { id: id.clone(), source: Box::new(e) })?;
            Ok((id.clone(), v))
        })
        .collect();
    EmbeddingMatrix::from_rows(rows?, backend.output_dim(), backend.name())
}

fn read_image(path: &Path) -> Result<Vec<u8>, EmbeddingError> {
    std::fs::read(path).map_err(EmbeddingError::Io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageFormat, Rgb};
    use std::io::Cursor;

    fn png(w: u32, h: u32, color: [u8; 3]) -> Vec<u8> {
        let img = RgbImage::from_pixel(w, h, Rgb(color));
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn deterministic() {
        let bytes = png(50, 30, [10, 200, 30]);
        let b = PooledColorBackend;
        assert_eq!(b.extract(&bytes).unwrap(), b.extract(&bytes).unwrap());
        assert_eq!(b.extract(&bytes).unwrap().len(), b.output_dim());
    }

    #[test]
    fn black_and_white_differ() {
        let b = PooledColorBackend;
        let black = b.extract(&png(224, 224, [0, 0, 0])).unwrap();
        let white = b.extract(&png(224, 224, [255, 255, 255])).unwrap();
        let dist: f32 = black.iter().zip(&white).map(|(x, y)| (x - y) * (x - y)).sum::<f32>().sqrt();
        // 147 channel means differ by 1, two histogram bins per channel by 1
        assert!((dist - (147.0f32 + 6.0).sqrt()).abs() < 1e-4, "dist = {dist}");
    }

    #[test]
    fn single_pixel_image() {
        let v = PooledColorBackend.extract(&png(1, 1, [128, 64, 32])).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        assert!((v[0] - 128.0 / 255.0).abs() < 1e-6);
    }

    #[test]
    fn undecodable_bytes() {
        assert!(matches!(PooledColorBackend.extract(b"not an image"), Err(EmbeddingError::Decode(_))));
        assert!(matches!(PrecomputedOnly.extract(b""), Err(EmbeddingError::BackendUnavailable(_))));
    }
}
