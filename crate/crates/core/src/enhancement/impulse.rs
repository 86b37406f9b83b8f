use crate::imaging::GrayImage;

/// Switching 3x3 median: a pixel is replaced by its neighbourhood median
/// only when it is the window's minimum or maximum and differs from the
/// median by more than `threshold`. Smooth structure is left untouched.
pub fn suppress_impulses(img: &GrayImage, threshold: u8) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let src = img.pixels();
    let mut out = src.to_vec();
    let mut win = [0u8; 9];
    for y in 0..h {
        for x in 0..w {
            let mut n = 0;
            for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    win[n] = src[yy * w + xx];
                    n += 1;
                }
            }
            let win = &mut win[..n];
            win.sort_unstable();
            let p = src[y * w + x];
            let med = win[n / 2];
            if (p == win[0] || p == win[n - 1]) && p.abs_diff(med) > threshold {
                out[y * w + x] = med;
            }
        }
    }
    GrayImage::new(w, h, img.ppi(), out).expect("same dimensions")
}
