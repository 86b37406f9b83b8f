//! Binary morphology with a square structuring element of side `2r + 1`.
//!
//! The element is clipped at the image border: only in-bounds neighbours
//! take part, so erosion and dilation stay an adjunction and opening and
//! closing stay idempotent.

use super::BinaryImage;

/// Sliding-window "any" (dilate) or "all" (erode) along one axis.
fn pass(src: &[bool], w: usize, h: usize, r: usize, horizontal: bool, all: bool) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let (lines, len) = if horizontal { (h, w) } else { (w, h) };
    let idx = |line: usize, i: usize| {
        if horizontal {
            line * w + i
        } else {
            i * w + line
        }
    };
    // prefix[i] = number of foreground pixels in [0, i) along the line
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for i in 0..len {
            prefix[i + 1] = prefix[i] + src[idx(line, i)] as usize;
        }
        for i in 0..len {
            let a = i.saturating_sub(r);
            let b = (i + r + 1).min(len);
            let count = prefix[b] - prefix[a];
            out[idx(line, i)] = if all { count == b - a } else { count > 0 };
        }
    }
    out
}

fn separable(img: &BinaryImage, radius: usize, all: bool) -> BinaryImage {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let rows = pass(img.bits(), w, h, radius, true, all);
    let bits = pass(&rows, w, h, radius, false, all);
    BinaryImage::from_parts_unchecked(w, h, img.ppi(), bits)
}

pub fn erode(img: &BinaryImage, radius: usize) -> BinaryImage {
    separable(img, radius, true)
}

pub fn dilate(img: &BinaryImage, radius: usize) -> BinaryImage {
    separable(img, radius, false)
}

pub fn open(img: &BinaryImage, radius: usize) -> BinaryImage {
    dilate(&erode(img, radius), radius)
}

pub fn close(img: &BinaryImage, radius: usize) -> BinaryImage {
    erode(&dilate(img, radius), radius)
}

/// Opening (noise specks) followed by closing (small gaps in ridges).
pub fn morphology_open_close(img: &BinaryImage, radius: usize) -> BinaryImage {
    close(&open(img, radius), radius)
}
