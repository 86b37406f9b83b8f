//! Planar points, similarity transforms, and their robust estimation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// 4-DOF map `p -> scale * R(rotation) * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    /// Radians, counter-clockwise in a y-up frame (clockwise on screen).
    pub rotation: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

/// Scale bounds for transforms accepted between impressions of one finger.
pub const ACCEPTED_SCALE: (f64, f64) = (0.5, 2.0);

impl SimilarityTransform {
    pub const fn identity() -> Self {
        SimilarityTransform {
            scale: 1.0,
            rotation: 0.0,
            tx: 0.0,
            ty: 0.0,
        }
    }

    pub fn new(scale: f64, rotation: f64, tx: f64, ty: f64) -> Self {
        SimilarityTransform {
            scale,
            rotation,
            tx,
            ty,
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.rotation.sin_cos();
        Point {
            x: self.scale * (c * p.x - s * p.y) + self.tx,
            y: self.scale * (s * p.x + c * p.y) + self.ty,
        }
    }

    pub fn inverse(&self) -> Self {
        let inv_scale = 1.0 / self.scale;
        let rot = -self.rotation;
        let (s, c) = rot.sin_cos();
        SimilarityTransform {
            scale: inv_scale,
            rotation: rot,
            tx: -inv_scale * (c * self.tx - s * self.ty),
            ty: -inv_scale * (s * self.tx + c * self.ty),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &SimilarityTransform) -> Self {
        let t = self.apply(Point::new(first.tx, first.ty));
        SimilarityTransform {
            scale: self.scale * first.scale,
            rotation: self.rotation + first.rotation,
            tx: t.x,
            ty: t.y,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.scale >= ACCEPTED_SCALE.0 && self.scale <= ACCEPTED_SCALE.1
    }

    /// Rotation wrapped to (-pi, pi].
    pub fn wrapped_rotation(&self) -> f64 {
        wrap_angle(self.rotation)
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut r = a.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r -= tau;
    }
    r
}

fn centroid(points: impl Iterator<Item = Point>) -> Point {
    let mut n = 0usize;
    let mut acc = Point::default();
    for p in points {
        acc.x += p.x;
        acc.y += p.y;
        n += 1;
    }
    if n == 0 {
        return acc;
    }
    Point::new(acc.x / n as f64, acc.y / n as f64)
}

/// Closed-form similarity fit mapping `src[i]` onto `dst[i]`.
///
/// Both sets are centred on their centroids; the scale is the ratio of their
/// RMS spreads and the rotation is the angle of the 2-D cross-covariance.
/// Returns `None` when the source points coincide.
pub fn fit_similarity(pairs: &[(Point, Point)]) -> Option<SimilarityTransform> {
    if pairs.is_empty() {
        return None;
    }
    let cs = centroid(pairs.iter().map(|p| p.0));
    let cd = centroid(pairs.iter().map(|p| p.1));
    let (mut a, mut b, mut ns, mut nd) = (0.0, 0.0, 0.0, 0.0);
    for &(s, d) in pairs {
        let (sx, sy) = (s.x - cs.x, s.y - cs.y);
        let (dx, dy) = (d.x - cd.x, d.y - cd.y);
        a += sx * dx + sy * dy;
        b += sx * dy - sy * dx;
        ns += sx * sx + sy * sy;
        nd += dx * dx + dy * dy;
    }
    if ns <= f64::EPSILON || nd <= f64::EPSILON {
        return None;
    }
    let scale = (nd / ns).sqrt();
    let rotation = b.atan2(a);
    let (sn, c) = rotation.sin_cos();
    Some(SimilarityTransform {
        scale,
        rotation,
        tx: cd.x - scale * (c * cs.x - sn * cs.y),
        ty: cd.y - scale * (sn * cs.x + c * cs.y),
    })
}

/// Root-mean-square residual of `t` over the selected pairs.
pub fn rms_residual(t: &SimilarityTransform, pairs: &[(Point, Point)], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let sum: f64 = idx.iter().map(|&i| t.apply(pairs[i].0).dist_sq(pairs[i].1)).sum();
    (sum / idx.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusParams {
    pub iterations: usize,
    /// Points per hypothesis; 2 is the minimum for a similarity.
    pub sample_size: usize,
    pub inlier_tolerance: f64,
    /// Samples whose source points are collinear (sample size 3+) or
    /// coincident (sample size 2) within this many pixels are skipped.
    pub degeneracy_tolerance: f64,
    pub seed: u64,
}

impl Default for ConsensusParams {
    fn default() -> Self {
        ConsensusParams {
            iterations: 200,
            sample_size: 3,
            inlier_tolerance: 10.0,
            degeneracy_tolerance: 1.0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConsensusFit {
    pub transform: SimilarityTransform,
    /// Indices into the input pairs, ascending.
    pub inliers: Vec<usize>,
    pub rms: f64,
}

/// True when the sample's source points cannot pin down a stable model.
pub fn sample_is_degenerate(points: &[Point], tol: f64) -> bool {
    match points.len() {
        0 | 1 => true,
        2 => points[0].dist(points[1]) < tol,
        _ => {
            // Height of the point set over its longest chord.
            let mut best = (0, 1, -1.0);
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    let d = points[i].dist(points[j]);
                    if d > best.2 {
                        best = (i, j, d);
                    }
                }
            }
            let (i, j, len) = best;
            if len < tol {
                return true;
            }
            let (a, b) = (points[i], points[j]);
            let height = points
                .iter()
                .map(|p| ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)).abs() / len)
                .fold(0.0, f64::max);
            height < tol
        }
    }
}

fn inliers_of(t: &SimilarityTransform, pairs: &[(Point, Point)], tol: f64) -> Vec<usize> {
    let tol_sq = tol * tol;
    (0..pairs.len())
        .filter(|&i| t.apply(pairs[i].0).dist_sq(pairs[i].1) <= tol_sq)
        .collect()
}

/// Seeded hypothesize-and-verify similarity estimation.
///
/// Each iteration fits a minimal sample; the winner is chosen by
/// (inlier count desc, inlier RMS asc, iteration index asc) and refit on
/// its inlier set. Hypotheses with scale outside `scale_bounds` are ignored.
pub fn consensus_similarity(
    pairs: &[(Point, Point)],
    params: &ConsensusParams,
    scale_bounds: Option<(f64, f64)>,
) -> Result<ConsensusFit> {
    let k = params.sample_size.max(2);
    if pairs.len() < k {
        return Err(Error::InsufficientPairs {
            needed: k,
            got: pairs.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    let mut sample_pairs = Vec::with_capacity(k);
    let mut sample_src = Vec::with_capacity(k);
    for _ in 0..params.iterations {
        let picked = rand::seq::index::sample(&mut rng, pairs.len(), k);
        sample_pairs.clear();
        sample_src.clear();
        for i in picked.iter() {
            sample_pairs.push(pairs[i]);
            sample_src.push(pairs[i].0);
        }
        if sample_is_degenerate(&sample_src, params.degeneracy_tolerance) {
            continue;
        }
        let Some(t) = fit_similarity(&sample_pairs) else {
            continue;
        };
        if let Some((lo, hi)) = scale_bounds {
            if t.scale < lo || t.scale > hi {
                continue;
            }
        }
        let inl = inliers_of(&t, pairs, params.inlier_tolerance);
        let rms = rms_residual(&t, pairs, &inl);
        let better = match &best {
            None => true,
            Some((_, brms, binl)) => {
                inl.len() > binl.len() || (inl.len() == binl.len() && rms < *brms)
            }
        };
        if better {
            best = Some((inl.len(), rms, inl));
        }
    }
    let (_, _, inliers) = best.ok_or(Error::DegenerateSamples)?;
    let subset: Vec<(Point, Point)> = inliers.iter().map(|&i| pairs[i]).collect();
    let transform = fit_similarity(&subset).ok_or(Error::DegenerateSamples)?;
    let rms = rms_residual(&transform, pairs, &inliers);
    Ok(ConsensusFit {
        transform,
        inliers,
        rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trips() {
        let t = SimilarityTransform::new(1.3, 0.7, 12.0, -4.0);
        let p = Point::new(3.0, 8.0);
        let q = t.inverse().apply(t.apply(p));
        assert!(q.dist(p) < 1e-12);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = SimilarityTransform::new(1.1, 0.2, 5.0, 1.0);
        let b = SimilarityTransform::new(0.9, -0.5, -3.0, 7.0);
        let p = Point::new(-2.0, 4.5);
        assert!(b.compose(&a).apply(p).dist(b.apply(a.apply(p))) < 1e-12);
    }

    #[test]
    fn fit_recovers_exact_transform() {
        let t = SimilarityTransform::new(1.1, 15f64.to_radians(), 40.0, -25.0);
        let pairs: Vec<_> = [(0.0, 0.0), (100.0, 3.0), (20.0, 80.0), (55.0, 41.0)]
            .iter()
            .map(|&(x, y)| {
                let p = Point::new(x, y);
                (p, t.apply(p))
            })
            .collect();
        let f = fit_similarity(&pairs).unwrap();
        assert!((f.scale - 1.1).abs() < 1e-12);
        assert!((f.rotation - 15f64.to_radians()).abs() < 1e-12);
        assert!((f.tx - 40.0).abs() < 1e-9 && (f.ty + 25.0).abs() < 1e-9);
    }

    #[test]
    fn coincident_points_have_no_fit() {
        let p = Point::new(1.0, 1.0);
        assert!(fit_similarity(&[(p, p), (p, Point::new(2.0, 2.0))]).is_none());
    }

    #[test]
    fn collinear_triples_are_degenerate() {
        let pts = [Point::new(0.0, 0.0), Point::new(10.0, 0.2), Point::new(20.0, 0.0)];
        assert!(sample_is_degenerate(&pts, 1.0));
        let pts = [Point::new(0.0, 0.0), Point::new(10.0, 5.0), Point::new(20.0, 0.0)];
        assert!(!sample_is_degenerate(&pts, 1.0));
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }
}
