use super::{MinutiaPairSet, MinutiaeTemplate};
use crate::error::{Error, Result};
use crate::geometry::{
    consensus_similarity, fit_similarity, sample_is_degenerate, ConsensusParams, Point,
    SimilarityTransform, ACCEPTED_SCALE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TransformParams {
    pub consensus: ConsensusParams,
    pub scale_bounds: (f64, f64),
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            consensus: ConsensusParams::default(),
            scale_bounds: ACCEPTED_SCALE,
        }
    }
}

/// Fits the latent-to-rolled similarity implied by matched minutiae.
///
/// Exactly three pairs are fit directly. Larger sets go through the seeded
/// consensus loop and are refit on the winning inliers. Pairs are put in a
/// canonical coordinate order first, so the result does not depend on the
/// order they were listed in.
pub fn estimate_transform(
    pairs: &MinutiaPairSet,
    latent: &MinutiaeTemplate,
    rolled: &MinutiaeTemplate,
    params: &TransformParams,
) -> Result<SimilarityTransform> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientPairs {
            needed: 3,
            got: pairs.len(),
        });
    }
    let mut pts = Vec::with_capacity(pairs.len());
    for p in &pairs.pairs {
        let (Some(l), Some(r)) = (latent.minutiae.get(p.latent), rolled.minutiae.get(p.rolled))
        else {
            return Err(Error::domain(format!(
                "pair ({}, {}) indexes past the templates",
                p.latent, p.rolled
            )));
        };
        pts.push((l.point(), r.point()));
    }
    pts.sort_by(|a, b| {
        a.0.x
            .total_cmp(&b.0.x)
            .then(a.0.y.total_cmp(&b.0.y))
            .then(a.1.x.total_cmp(&b.1.x))
            .then(a.1.y.total_cmp(&b.1.y))
    });

    let t = if pts.len() == 3 {
        let src: Vec<Point> = pts.iter().map(|p| p.0).collect();
        if sample_is_degenerate(&src, params.consensus.degeneracy_tolerance) {
            return Err(Error::DegenerateSamples);
        }
        fit_similarity(&pts).ok_or(Error::DegenerateSamples)?
    } else {
        let mut cp = params.consensus.clone();
        cp.sample_size = 3;
        consensus_similarity(&pts, &cp, Some(params.scale_bounds))?.transform
    };
    let (lo, hi) = params.scale_bounds;
    if !(lo..=hi).contains(&t.scale) {
        return Err(Error::ScaleRejected {
            scale: t.scale,
            min: lo,
            max: hi,
        });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minutiae::{Minutia, MinutiaPair};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(
        n: usize,
        t: &SimilarityTransform,
        seed: u64,
    ) -> (MinutiaeTemplate, MinutiaeTemplate, MinutiaPairSet) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat: Vec<Minutia> = (0..n)
            .map(|_| Minutia::new(rng.random_range(0.0..300.0), rng.random_range(0.0..300.0), 0.0))
            .collect();
        let rol: Vec<Minutia> = lat
            .iter()
            .map(|m| {
                let p = t.apply(m.point());
                Minutia::new(p.x, p.y, 0.0)
            })
            .collect();
        let pairs = (0..n)
            .map(|i| MinutiaPair { latent: i, rolled: i, score: 1.0 })
            .collect();
        (
            MinutiaeTemplate::new("l", 1000, lat),
            MinutiaeTemplate::new("r", 1000, rol),
            MinutiaPairSet::new(pairs),
        )
    }

    #[test]
    fn identity_from_three_pairs() {
        let l = MinutiaeTemplate::new(
            "l",
            1000,
            vec![Minutia::new(0.0, 0.0, 0.0), Minutia::new(10.0, 0.0, 0.0), Minutia::new(0.0, 10.0, 0.0)],
        );
        let pairs = MinutiaPairSet::new(
            (0..3).map(|i| MinutiaPair { latent: i, rolled: i, score: 1.0 }).collect(),
        );
        let t = estimate_transform(&pairs, &l, &l, &TransformParams::default()).unwrap();
        assert_eq!(t.scale, 1.0);
        assert_eq!(t.rotation, 0.0);
        assert!(t.tx.abs() < 1e-12 && t.ty.abs() < 1e-12);
    }

    #[test]
    fn recovers_known_transform() {
        let truth = SimilarityTransform::new(1.1, 15f64.to_radians(), 40.0, -25.0);
        let (l, r, p) = setup(10, &truth, 7);
        let t = estimate_transform(&p, &l, &r, &TransformParams::default()).unwrap();
        assert!((t.scale - 1.1).abs() < 1e-9);
        assert!((t.rotation - truth.rotation).abs() < 1e-9);
        assert!((t.tx - 40.0).abs() < 1e-9 && (t.ty + 25.0).abs() < 1e-9);
    }

    #[test]
    fn tolerates_gross_outliers() {
        let truth = SimilarityTransform::new(0.9, -0.4, 12.0, 30.0);
        let (l, mut r, p) = setup(10, &truth, 8);
        for i in 0..3 {
            r.minutiae[i].x += 200.0;
        }
        let t = estimate_transform(&p, &l, &r, &TransformParams::default()).unwrap();
        let rms = ((3..10)
            .map(|i| t.apply(l.minutiae[i].point()).dist_sq(r.minutiae[i].point()))
            .sum::<f64>()
            / 7.0)
            .sqrt();
        assert!(rms < 1.0);
    }

    #[test]
    fn pair_order_does_not_matter() {
        let truth = SimilarityTransform::new(1.0, 0.3, 5.0, 5.0);
        let (l, mut r, p) = setup(12, &truth, 9);
        for i in 0..4 {
            r.minutiae[i].y -= 80.0 + 10.0 * i as f64;
        }
        let a = estimate_transform(&p, &l, &r, &TransformParams::default()).unwrap();
        let mut rev = p.pairs.clone();
        rev.reverse();
        let b = estimate_transform(&MinutiaPairSet::new(rev), &l, &r, &TransformParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_too_few_and_bad_scale() {
        let (l, r, p) = setup(2, &SimilarityTransform::identity(), 1);
        assert!(matches!(
            estimate_transform(&p, &l, &r, &TransformParams::default()),
            Err(Error::InsufficientPairs { .. })
        ));
        let (l, r, p) = setup(3, &SimilarityTransform::new(3.0, 0.0, 0.0, 0.0), 2);
        assert!(matches!(
            estimate_transform(&p, &l, &r, &TransformParams::default()),
            Err(Error::ScaleRejected { .. })
        ));
    }
}
