use super::{Component, ExtractionParams, Pore};
use crate::imaging::BinaryImage;

/// Membership bitmap of a component over its bounding box grown by `pad`.
struct LocalMask {
    x0: i64,
    y0: i64,
    w: i64,
    h: i64,
    bits: Vec<bool>,
}

impl LocalMask {
    fn new(c: &Component, pad: usize) -> Self {
        let pad = pad as i64;
        let (bx0, by0, bx1, by1) = c.bbox;
        let x0 = bx0 as i64 - pad;
        let y0 = by0 as i64 - pad;
        let w = bx1 as i64 - bx0 as i64 + 1 + 2 * pad;
        let h = by1 as i64 - by0 as i64 + 1 + 2 * pad;
        let mut bits = vec![false; (w * h) as usize];
        for &(x, y) in &c.pixels {
            bits[((y as i64 - y0) * w + (x as i64 - x0)) as usize] = true;
        }
        LocalMask { x0, y0, w, h, bits }
    }

    fn contains(&self, x: i64, y: i64) -> bool {
        let (lx, ly) = (x - self.x0, y - self.y0);
        lx >= 0 && ly >= 0 && lx < self.w && ly < self.h && self.bits[(ly * self.w + lx) as usize]
    }
}

/// `4 * pi * area / perimeter^2`, clamped to `[0, 1]`.
///
/// The perimeter is the count of unit pixel edges between the component and
/// anything else, scaled by `pi / 4`: axis-aligned edge counting overstates
/// the length of a boundary of random direction by `4 / pi`, which would cap
/// digital disks near 0.6 instead of 1.
pub fn circularity(c: &Component) -> f64 {
    let m = LocalMask::new(c, 1);
    let mut perimeter = 0usize;
    for &(x, y) in &c.pixels {
        let (x, y) = (x as i64, y as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if !m.contains(x + dx, y + dy) {
                perimeter += 1;
            }
        }
    }
    if perimeter == 0 {
        return 0.0;
    }
    let area = c.area() as f64;
    let perimeter = perimeter as f64 * std::f64::consts::FRAC_PI_4;
    (4.0 * std::f64::consts::PI * area / (perimeter * perimeter)).min(1.0)
}

/// Fraction of ridge (foreground) pixels in the ring of Chebyshev width
/// `width` around the component, restricted to the image.
pub fn ridge_context_ratio(c: &Component, binary: &BinaryImage, width: usize) -> f64 {
    let m = LocalMask::new(c, width);
    let r = width as i64;
    let (iw, ih) = (binary.width() as i64, binary.height() as i64);
    let (mut ring, mut ridge) = (0usize, 0usize);
    for ly in 0..m.h {
        for lx in 0..m.w {
            let (x, y) = (m.x0 + lx, m.y0 + ly);
            if x < 0 || y < 0 || x >= iw || y >= ih || m.contains(x, y) {
                continue;
            }
            let near = (-r..=r).any(|dy| (-r..=r).any(|dx| m.contains(x + dx, y + dy)));
            if near {
                ring += 1;
                if binary.get(x as usize, y as usize) {
                    ridge += 1;
                }
            }
        }
    }
    if ring == 0 {
        0.0
    } else {
        ridge as f64 / ring as f64
    }
}

pub(crate) const RIDGE_CONTEXT_WIDTH: usize = 2;

/// Keeps small, round components sitting inside ridges.
///
/// Components must be background-polarity (pores read as valley-coloured
/// dots enclosed by ridge).
pub fn filter_pore_components(
    components: &[Component],
    binary: &BinaryImage,
    params: &ExtractionParams,
) -> Vec<Pore> {
    let max_area = params.max_area(binary.ppi());
    let mut pores = Vec::new();
    for c in components {
        let area = c.area() as f64;
        if area < 1.0 || area > max_area {
            continue;
        }
        let circ = circularity(c);
        if circ < params.circularity_min {
            continue;
        }
        let ratio = ridge_context_ratio(c, binary, RIDGE_CONTEXT_WIDTH);
        if ratio < params.ridge_context_min {
            continue;
        }
        let (sx, sy) = c
            .pixels
            .iter()
            .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x as f64, ay + y as f64));
        pores.push(Pore {
            x: sx / area,
            y: sy / area,
            area,
            circularity: circ,
            confidence: (circ * ratio).min(1.0),
        });
    }
    pores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pores::{connected_components, Polarity};

    fn band_with_hole(radius: f64, cx: f64, cy: f64) -> BinaryImage {
        BinaryImage::from_fn(40, 40, 1000, |x, y| {
            let in_band = (8..32).contains(&y);
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            in_band && dx * dx + dy * dy > radius * radius
        })
        .unwrap()
    }

    #[test]
    fn disk_inside_band_is_one_pore() {
        let b = band_with_hole(3.0, 20.0, 20.0);
        let cc = connected_components(&b, Polarity::Background);
        let pores = filter_pore_components(&cc, &b, &ExtractionParams::default());
        assert_eq!(pores.len(), 1);
        let p = pores[0];
        assert_eq!(p.area, 29.0);
        assert!((p.x - 20.0).abs() <= 0.5 && (p.y - 20.0).abs() <= 0.5);
        // 29 px over 28 unit edges.
        let per = 28.0 * std::f64::consts::FRAC_PI_4;
        assert!((p.circularity - 4.0 * std::f64::consts::PI * 29.0 / (per * per)).abs() < 1e-12);
        assert!(p.circularity >= 0.5);
        assert!((p.confidence - p.circularity).abs() < 1e-12);
    }

    #[test]
    fn oversized_component_is_rejected() {
        // 10x15 hole: area 150 > 100 at 1000 ppi.
        let b = BinaryImage::from_fn(40, 40, 1000, |x, y| {
            !((10..20).contains(&x) && (12..27).contains(&y))
        })
        .unwrap();
        let cc = connected_components(&b, Polarity::Background);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].area(), 150);
        assert!(filter_pore_components(&cc, &b, &ExtractionParams::default()).is_empty());
    }

    #[test]
    fn slit_in_open_background_fails_both_tests() {
        let b = BinaryImage::from_fn(60, 20, 1000, |x, y| {
            // Ridge only on a thin band above; the slit sits in open valley.
            y < 2 && !(10..50).contains(&x)
        })
        .unwrap();
        let slit = Component {
            pixels: (10..50).flat_map(|x| (8..11).map(move |y| (x, y))).collect(),
            bbox: (10, 8, 49, 10),
        };
        let circ = circularity(&slit);
        let p = 86.0 * std::f64::consts::FRAC_PI_4;
        let expected = 4.0 * std::f64::consts::PI * 120.0 / (p * p);
        assert!((circ - expected).abs() < 1e-12);
        assert!(circ < 0.5);
        assert!(ridge_context_ratio(&slit, &b, 2) < 0.6);
    }

    #[test]
    fn single_pixel_circularity() {
        let c = Component {
            pixels: vec![(3, 3)],
            bbox: (3, 3, 3, 3),
        };
        assert_eq!(circularity(&c), 1.0);
    }
}
