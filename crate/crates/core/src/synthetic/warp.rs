use std::f64::consts::TAU;

use rand::Rng;

use crate::geometry::{Point, SimilarityTransform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformTerm {
    pub ax: f64,
    pub ay: f64,
    pub kx: f64,
    pub ky: f64,
    pub phase: f64,
}

/// Smooth displacement `p -> p + sum (ax, ay) * sin(kx x + ky y + phase)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Deformation {
    pub terms: Vec<DeformTerm>,
}

const TERMS: usize = 3;
const WAVELENGTH: (f64, f64) = (300.0, 600.0);

impl Deformation {
    pub fn none() -> Self {
        Deformation::default()
    }

    /// Random field whose displacement never exceeds `amplitude` pixels.
    pub fn random<R: Rng>(amplitude: f64, rng: &mut R) -> Self {
        if amplitude <= 0.0 {
            return Deformation::none();
        }
        let terms = (0..TERMS)
            .map(|_| {
                let a = amplitude / TERMS as f64;
                let dir: f64 = rng.random_range(0.0..TAU);
                let wdir: f64 = rng.random_range(0.0..TAU);
                let k = TAU / rng.random_range(WAVELENGTH.0..WAVELENGTH.1);
                DeformTerm {
                    ax: a * dir.cos(),
                    ay: a * dir.sin(),
                    kx: k * wdir.cos(),
                    ky: k * wdir.sin(),
                    phase: rng.random_range(0.0..TAU),
                }
            })
            .collect();
        Deformation { terms }
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self) -> f64 {
        self.terms.iter().map(|t| t.ax.hypot(t.ay)).sum()
    }

    pub fn displacement(&self, p: Point) -> (f64, f64) {
        let mut d = (0.0, 0.0);
        for t in &self.terms {
            let s = (t.kx * p.x + t.ky * p.y + t.phase).sin();
            d.0 += t.ax * s;
            d.1 += t.ay * s;
        }
        d
    }

    pub fn forward(&self, p: Point) -> Point {
        let d = self.displacement(p);
        Point::new(p.x + d.0, p.y + d.1)
    }

    /// Fixed-point inverse; contracts because the field is low-frequency.
    pub fn inverse(&self, q: Point) -> Point {
        let mut p = q;
        for _ in 0..8 {
            let d = self.displacement(p);
            p = Point::new(q.x - d.0, q.y - d.1);
        }
        p
    }
}

/// One step in the chain that takes field coordinates to image pixels.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Stage {
    Deform(Deformation),
    Similarity(SimilarityTransform),
    Offset(f64, f64),
}

pub(crate) fn forward(stages: &[Stage], mut p: Point) -> Point {
    for s in stages {
        p = match s {
            Stage::Deform(d) => d.forward(p),
            Stage::Similarity(t) => t.apply(p),
            Stage::Offset(dx, dy) => Point::new(p.x - dx, p.y - dy),
        };
    }
    p
}

pub(crate) fn inverse(stages: &[Stage], inverses: &[Option<SimilarityTransform>], mut q: Point) -> Point {
    for (s, inv) in stages.iter().zip(inverses).rev() {
        q = match s {
            Stage::Deform(d) => d.inverse(q),
            Stage::Similarity(_) => inv.unwrap().apply(q),
            Stage::Offset(dx, dy) => Point::new(q.x + dx, q.y + dy),
        };
    }
    q
}

/// Field units per output pixel.
pub(crate) fn field_units_per_pixel(stages: &[Stage]) -> f64 {
    stages
        .iter()
        .map(|s| match s {
            Stage::Similarity(t) => 1.0 / t.scale,
            _ => 1.0,
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deformation_inverse_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Deformation::random(8.0, &mut rng);
        assert!(d.amplitude() <= 8.0 + 1e-9);
        for i in 0..50 {
            let p = Point::new(i as f64 * 13.0, 400.0 - i as f64 * 7.0);
            assert!(d.inverse(d.forward(p)).dist(p) < 1e-6);
        }
    }

    #[test]
    fn chain_inverse_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = SimilarityTransform::new(1.1, 0.35, 20.0, -5.0);
        let stages = vec![
            Stage::Deform(Deformation::random(4.0, &mut rng)),
            Stage::Similarity(t),
            Stage::Offset(30.0, 12.0),
        ];
        let inv: Vec<Option<SimilarityTransform>> = vec![None, Some(t.inverse()), None];
        let p = Point::new(123.0, 77.0);
        assert!(inverse(&stages, &inv, forward(&stages, p)).dist(p) < 1e-6);
        assert!((field_units_per_pixel(&stages) - 1.0 / 1.1).abs() < 1e-12);
    }
}
