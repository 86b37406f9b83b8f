use super::{BinaryImage, GrayImage, IntegralImage};
use crate::error::{Error, Result};

/// Maps a confidence percentage onto the Bradley threshold percentage:
/// a pixel is ridge when darker than `(100 - confidence * CONFIDENCE_SCALE)`%
/// of its local mean. Confidence 50 gives 80%.
pub const CONFIDENCE_SCALE: f64 = 0.4;

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.125;

/// Side of the square averaging window for an image of the given size.
pub fn window_side(width: usize, height: usize, window_fraction: f64) -> usize {
    let side = (window_fraction * width.min(height) as f64).round() as usize;
    side.max(3)
}

/// Bradley-style local-mean binarization with clipped border windows.
///
/// Pixel `(x, y)` becomes foreground iff
/// `I(x, y) * 100 < mean(window) * (100 - confidence * CONFIDENCE_SCALE)`.
pub fn adaptive_threshold(
    img: &GrayImage,
    window_fraction: f64,
    confidence: f64,
) -> Result<BinaryImage> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::domain(format!(
            "window_fraction {window_fraction} outside (0, 1]"
        )));
    }
    if !(0.0..=100.0).contains(&confidence) {
        return Err(Error::domain(format!(
            "confidence {confidence} outside [0, 100]"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let side = window_side(w, h, window_fraction);
    let ii = IntegralImage::new(img);
    let factor = 100.0 - confidence * CONFIDENCE_SCALE;
    let lo = side / 2;
    let hi = side - lo;
    let mut bits = Vec::with_capacity(w * h);
    for y in 0..h {
        let y0 = y.saturating_sub(lo);
        let y1 = (y + hi).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(lo);
            let x1 = (x + hi).min(w);
            let area = ((x1 - x0) * (y1 - y0)) as f64;
            let sum = ii.sum(x0, y0, x1, y1) as f64;
            let v = img.get(x, y) as f64;
            bits.push(v * 100.0 * area < sum * factor);
        }
    }
    Ok(BinaryImage::from_parts_unchecked(w, h, img.ppi(), bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Per-pixel mean over the clipped window, no integral image.
    fn naive_threshold(img: &GrayImage, frac: f64, conf: f64) -> Vec<bool> {
        let (w, h) = (img.width(), img.height());
        let side = window_side(w, h, frac);
        let (lo, hi) = (side / 2, side - side / 2);
        let mut out = vec![];
        for y in 0..h {
            for x in 0..w {
                let (mut sum, mut n) = (0.0, 0.0);
                for yy in y.saturating_sub(lo)..(y + hi).min(h) {
                    for xx in x.saturating_sub(lo)..(x + hi).min(w) {
                        sum += img.get(xx, yy) as f64;
                        n += 1.0;
                    }
                }
                let mean = sum / n;
                out.push((img.get(x, y) as f64) < mean * (1.0 - conf * 0.4 / 100.0) - 1e-9);
            }
        }
        out
    }

    #[test]
    fn uniform_image_is_background() {
        let img = GrayImage::filled(20, 20, 1000, 128).unwrap();
        let b = adaptive_threshold(&img, 0.125, 50.0).unwrap();
        assert_eq!(b.count_foreground(), 0);
    }

    #[test]
    fn black_square_on_white() {
        let img = GrayImage::from_fn(200, 200, 1000, |x, y| {
            if (95..105).contains(&x) && (95..105).contains(&y) {
                0
            } else {
                255
            }
        })
        .unwrap();
        let b = adaptive_threshold(&img, 0.125, 50.0).unwrap();
        assert_eq!(b.bits(), naive_threshold(&img, 0.125, 50.0).as_slice());
        for y in 0..200 {
            for x in 0..200 {
                let inside = (95..105).contains(&x) && (95..105).contains(&y);
                let ring = (94..106).contains(&x) && (94..106).contains(&y);
                if inside {
                    assert!(b.get(x, y), "({x},{y}) should be ridge");
                } else if !ring {
                    assert!(!b.get(x, y), "({x},{y}) should be background");
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let img = GrayImage::filled(8, 8, 1000, 9).unwrap();
        assert!(adaptive_threshold(&img, 0.0, 50.0).is_err());
        assert!(adaptive_threshold(&img, 1.5, 50.0).is_err());
        assert!(adaptive_threshold(&img, 0.5, -1.0).is_err());
        assert!(adaptive_threshold(&img, 0.5, 101.0).is_err());
    }

    #[test]
    fn window_is_clamped_to_three() {
        assert_eq!(window_side(10, 10, 0.01), 3);
        assert_eq!(window_side(800, 640, 0.125), 80);
    }
}
