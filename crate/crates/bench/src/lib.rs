//! Fixtures shared by the benchmarks.

use poreid_core::geometry::SimilarityTransform;
use poreid_core::identification::{Gallery, GalleryEntry};
use poreid_core::pores::{Pore, PoreTemplate};
use poreid_core::synthetic::{derive_latent, generate, LatentParams, Region, SynthOutput, SynthParams};

pub fn print(seed: u64, side: usize) -> SynthOutput {
    generate(&SynthParams { seed, width: side, height: side, ..Default::default() })
        .expect("synthetic print")
}

/// A rotated central crop of `parent`, `side` pixels square.
pub fn latent_of(parent: &SynthOutput, side: usize) -> SynthOutput {
    let (w, h) = (parent.image.width() as f64, parent.image.height() as f64);
    let rot = SimilarityTransform::new(1.0, 0.2, 0.0, 0.0);
    let c = rot.apply(poreid_core::geometry::Point::new(w / 2.0, h / 2.0));
    let t = SimilarityTransform::new(1.0, 0.2, w / 2.0 - c.x, h / 2.0 - c.y);
    let crop = Region::new((w as usize - side) / 2, (h as usize - side) / 2, side, side);
    let mut lp = LatentParams::new(t, crop);
    lp.noise_level = 0.05;
    lp.seed = parent.image.width() as u64;
    derive_latent(parent, &lp).expect("latent")
}

/// Ground-truth pores as a template, skipping extraction.
pub fn truth_template(s: &SynthOutput, id: &str) -> PoreTemplate {
    let ppi = s.image.ppi();
    PoreTemplate::new(id, ppi, s.truth_pores.points.iter().map(|p| Pore::at(p.x, p.y)).collect())
}

pub fn gallery(prints: &[SynthOutput]) -> Gallery {
    let entries = prints
        .iter()
        .enumerate()
        .map(|(i, s)| GalleryEntry {
            id: format!("g{i:03}"),
            minutiae: s.truth_minutiae.clone(),
            pores: truth_template(s, &format!("g{i:03}")),
        })
        .collect();
    Gallery::new(1000, entries).expect("gallery")
}
