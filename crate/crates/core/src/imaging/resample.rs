use super::{GrayImage, MAX_PPI, MIN_PPI};
use crate::error::{Error, Result};

/// Bilinear resampling to a new resolution; dimensions scale by
/// `target_ppi / ppi` and are rounded.
pub fn resample(img: &GrayImage, target_ppi: u32) -> Result<GrayImage> {
    if !(MIN_PPI..=MAX_PPI).contains(&target_ppi) {
        return Err(Error::domain(format!(
            "target ppi {target_ppi} outside [{MIN_PPI}, {MAX_PPI}]"
        )));
    }
    if target_ppi == img.ppi() {
        return Ok(img.clone());
    }
    let ratio = target_ppi as f64 / img.ppi() as f64;
    let (w, h) = (img.width(), img.height());
    let nw = (w as f64 * ratio).round() as usize;
    let nh = (h as f64 * ratio).round() as usize;
    if nw == 0 || nh == 0 {
        return Err(Error::domain(format!(
            "resampling {w}x{h} to {target_ppi} ppi yields an empty image"
        )));
    }
    let sx = w as f64 / nw as f64;
    let sy = h as f64 / nh as f64;
    let sample_axis = |i: usize, scale: f64, len: usize| {
        let c = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = c.floor() as usize;
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, c - i0 as f64)
    };
    let cols: Vec<_> = (0..nw).map(|x| sample_axis(x, sx, w)).collect();
    GrayImage::from_fn(nw, nh, target_ppi, |x, y| {
        let (y0, y1, fy) = sample_axis(y, sy, h);
        let (x0, x1, fx) = cols[x];
        let top = img.get(x0, y0) as f64 * (1.0 - fx) + img.get(x1, y0) as f64 * fx;
        let bottom = img.get(x0, y1) as f64 * (1.0 - fx) + img.get(x1, y1) as f64 * fx;
        (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8
    })
}
