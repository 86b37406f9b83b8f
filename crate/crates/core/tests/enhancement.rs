use std::f64::consts::PI;

use poreid_core::enhancement::{analyze_blocks, stft_enhance, EnhancementParams, NoEnhancement};
use poreid_core::evaluation::score_detections;
use poreid_core::imaging::GrayImage;
use poreid_core::pores::{ExtractionParams, PoreExtractor};
use poreid_core::synthetic::{generate, SynthParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn synth(seed: u64, side: usize) -> poreid_core::synthetic::SynthOutput {
    generate(&SynthParams {
        seed,
        width: side,
        height: side,
        ..Default::default()
    })
    .unwrap()
}

fn salt_and_pepper(img: &GrayImage, fraction: f64, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if rng.random_bool(fraction) {
                out.set(x, y, if rng.random_bool(0.5) { 0 } else { 255 });
            }
        }
    }
    out
}

#[test]
fn enhancement_beats_raw_extraction_under_salt_and_pepper() {
    let xp = ExtractionParams::default();
    let raw = PoreExtractor::new(Box::new(NoEnhancement), xp.clone()).unwrap();
    let enhanced = PoreExtractor::stft(EnhancementParams::default(), xp).unwrap();
    let (mut f_raw, mut f_enh) = (0.0, 0.0);
    for seed in 0..3 {
        let s = synth(seed, 384);
        let noisy = salt_and_pepper(&s.image, 0.2, 100 + seed);
        let r = score_detections(&raw.extract(&noisy, "n").unwrap(), &s.truth_pores, 3.0).unwrap();
        let e = score_detections(&enhanced.extract(&noisy, "n").unwrap(), &s.truth_pores, 3.0).unwrap();
        f_raw += r.f1;
        f_enh += e.f1;
    }
    assert!(f_enh > f_raw, "enhanced {f_enh:.3} vs raw {f_raw:.3}");
}

fn rotate_cw(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    GrayImage::from_fn(h, w, img.ppi(), |x, y| img.get(y, h - 1 - x)).unwrap()
}

#[test]
fn orientation_follows_quarter_turn() {
    // 320 = 19 strides of 16 plus one 32-pixel block, so the grid maps onto itself.
    let img = synth(4, 320).image;
    let p = EnhancementParams::default();
    let a = analyze_blocks(&img, &p).unwrap();
    let b = analyze_blocks(&rotate_cw(&img), &p).unwrap();
    assert_eq!((a.cols, a.rows), (b.rows, b.cols));
    let mut checked = 0;
    for r in 0..a.rows {
        for c in 0..a.cols {
            let (pa, pb) = (a.get(c, r), b.get(a.rows - 1 - r, c));
            if !(pa.is_ridge && pb.is_ridge) {
                continue;
            }
            checked += 1;
            let d = angle_diff(pa.orientation + PI / 2.0, pb.orientation);
            assert!(d <= 5f64.to_radians(), "block ({c},{r}) off by {:.1} deg", d.to_degrees());
        }
    }
    assert!(checked > a.blocks.len() / 2);
}

#[test]
fn enhancement_keeps_orientation_field() {
    let img = synth(5, 320).image;
    let p = EnhancementParams::default();
    let before = analyze_blocks(&img, &p).unwrap();
    let after = analyze_blocks(&stft_enhance(&img, &p).unwrap(), &p).unwrap();
    for (x, y) in before.blocks.iter().zip(&after.blocks) {
        if x.is_ridge && y.is_ridge {
            assert!(angle_diff(x.orientation, y.orientation) <= 5f64.to_radians());
        }
    }
}

#[test]
fn ridge_mask_ignores_contrast_scaling() {
    let img = synth(6, 256).image;
    let half = GrayImage::from_fn(256, 256, img.ppi(), |x, y| img.get(x, y) / 2).unwrap();
    let p = EnhancementParams::default();
    let a = analyze_blocks(&img, &p).unwrap();
    let b = analyze_blocks(&half, &p).unwrap();
    let mask = |g: &poreid_core::enhancement::BlockGrid| g.blocks.iter().map(|b| b.is_ridge).collect::<Vec<_>>();
    assert_eq!(mask(&a), mask(&b));
}

#[test]
fn enhancement_is_deterministic() {
    let img = synth(7, 256).image;
    let p = EnhancementParams::default();
    assert_eq!(stft_enhance(&img, &p).unwrap(), stft_enhance(&img, &p).unwrap());
}
