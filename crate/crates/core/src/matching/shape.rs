use std::f64::consts::TAU;

use super::{build_candidate_graph, hamiltonian_order, refine_matches, scale_bounds};
use super::{MatchMode, MatchParams, PoreMatchResult};
use crate::geometry::{consensus_similarity, fit_similarity, ConsensusParams, Point};
use crate::pores::PoreTemplate;

/// Inner and outer histogram radii as multiples of the median
/// nearest-neighbour spacing.
const RADIUS_RANGE: (f64, f64) = (0.5, 8.0);

fn median_nn_spacing(pts: &[Point]) -> f64 {
    let mut nn: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            pts.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| p.dist(*q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mid = nn.len() / 2;
    *nn.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Log-polar shape-context histogram for every pore, normalized to unit mass.
///
/// Angles are measured from the direction in which the greedy Hamiltonian
/// path enters the pore (the first pore uses its outgoing direction), which
/// makes the descriptor rotation invariant. Radii are scaled by the median
/// nearest-neighbour spacing, which survives cropping.
pub fn shape_contexts(t: &PoreTemplate, bins: (usize, usize)) -> Vec<Vec<f64>> {
    let pts = t.points();
    let n = pts.len();
    let (nr, na) = (bins.0.max(1), bins.1.max(1));
    if n < 2 {
        return vec![vec![0.0; nr * na]; n];
    }
    let order = hamiltonian_order(t);
    let mut reference = vec![0.0; n];
    for k in 0..n {
        let (a, b) = if k == 0 { (order[0], order[1]) } else { (order[k - 1], order[k]) };
        reference[order[k]] = (pts[b].y - pts[a].y).atan2(pts[b].x - pts[a].x);
    }
    let m = median_nn_spacing(&pts).max(1e-9);
    let log_lo = (RADIUS_RANGE.0 * m).ln();
    let log_hi = (RADIUS_RANGE.1 * m).ln();
    let log_step = (log_hi - log_lo) / nr as f64;

    (0..n)
        .map(|i| {
            let mut h = vec![0.0; nr * na];
            let mut mass = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = pts[i].dist(pts[j]);
                if d <= 0.0 || d > RADIUS_RANGE.1 * m {
                    continue;
                }
                let rb = (((d.ln() - log_lo) / log_step).floor().max(0.0) as usize).min(nr - 1);
                let ang = ((pts[j].y - pts[i].y).atan2(pts[j].x - pts[i].x) - reference[i]).rem_euclid(TAU);
                let ab = ((ang / TAU * na as f64) as usize).min(na - 1);
                h[rb * na + ab] += 1.0;
                mass += 1.0;
            }
            if mass > 0.0 {
                h.iter_mut().for_each(|v| *v /= mass);
            }
            h
        })
        .collect()
}

fn chi_squared(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x + y;
            if s > 0.0 {
                (x - y) * (x - y) / s
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

fn spread(pts: &[Point]) -> f64 {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    (x1 - x0).hypot(y1 - y0)
}

/// Aligns two pore sets without minutiae and matches them.
///
/// Shape-context candidates feed a seeded two-point consensus fit. The
/// winning alignment is then polished by refitting on the matched pairs
/// while that improves the score.
pub fn shape_fallback_match(
    latent: &PoreTemplate,
    rolled: &PoreTemplate,
    params: &MatchParams,
) -> PoreMatchResult {
    let empty = PoreMatchResult::empty(MatchMode::ShapeFallback);
    if latent.len() < 4 || rolled.len() < 4 {
        return empty;
    }
    let lp = latent.points();
    let rp = rolled.points();
    if spread(&lp) < 1.0 || spread(&rp) < 1.0 {
        return empty;
    }
    let hl = shape_contexts(latent, params.shape_context_bins);
    let hr = shape_contexts(rolled, params.shape_context_bins);
    let k = params.shape_candidates.max(1).min(rolled.len());

    let mut pairs = Vec::with_capacity(latent.len() * k);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(rolled.len());
    for (i, a) in hl.iter().enumerate() {
        scored.clear();
        scored.extend(hr.iter().enumerate().map(|(j, b)| (chi_squared(a, b), j)));
        scored.select_nth_unstable_by(k - 1, |x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut top = scored[..k].to_vec();
        top.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in &top {
            pairs.push((lp[i], rp[j]));
        }
    }

    let delta = params.delta(latent.ppi);
    let cp = ConsensusParams {
        iterations: params.fallback_ransac_iters,
        sample_size: 2,
        inlier_tolerance: delta,
        seed: params.seed,
        ..ConsensusParams::default()
    };
    let bounds = scale_bounds(params);
    let Ok(fit) = consensus_similarity(&pairs, &cp, Some(bounds)) else {
        return empty;
    };

    let mut t = fit.transform;
    let mut best = refine_matches(
        &build_candidate_graph(latent, rolled, &t, delta),
        MatchMode::ShapeFallback,
        Some(t),
    );
    for _ in 0..3 {
        if best.matches.len() < 2 {
            break;
        }
        let matched: Vec<(Point, Point)> = best
            .matches
            .iter()
            .map(|e| (lp[e.left], rp[e.right]))
            .collect();
        let Some(nt) = fit_similarity(&matched) else { break };
        if nt.scale < bounds.0 || nt.scale > bounds.1 {
            break;
        }
        let next = refine_matches(
            &build_candidate_graph(latent, rolled, &nt, delta),
            MatchMode::ShapeFallback,
            Some(nt),
        );
        if next.score <= best.score {
            break;
        }
        t = nt;
        best = next;
    }
    debug_assert_eq!(best.transform_used, Some(t));
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SimilarityTransform;
    use crate::pores::Pore;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Poisson-disk-ish cloud so that no two pores sit closer than 8 px.
    fn cloud(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point> {
        let mut pts: Vec<Point> = Vec::new();
        while pts.len() < n {
            let p = Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
            if pts.iter().all(|q| q.dist(p) >= 8.0) {
                pts.push(p);
            }
        }
        pts
    }

    fn raw(pts: &[Point]) -> PoreTemplate {
        PoreTemplate {
            source_id: "t".into(),
            ppi: 1000,
            pores: pts.iter().map(|p| Pore::at(p.x, p.y)).collect(),
        }
    }

    #[test]
    fn self_match_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = raw(&cloud(&mut rng, 50, 250.0));
        let r = shape_fallback_match(&t, &t, &MatchParams::default());
        let tr = r.transform_used.unwrap();
        assert!(tr.apply(Point::new(125.0, 125.0)).dist(Point::new(125.0, 125.0)) < 1.0);
        assert!(tr.wrapped_rotation().abs() < 1f64.to_radians());
        assert_eq!(r.matches.len(), 50);
        assert_eq!(r.score, 50.0);
    }

    #[test]
    fn recovers_rotated_copy() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let pts = cloud(&mut rng, 50, 250.0);
            let tr = SimilarityTransform::new(1.0, 25f64.to_radians(), 60.0, -30.0);
            let moved: Vec<Point> = pts.iter().map(|p| tr.apply(*p)).collect();
            let r = shape_fallback_match(&raw(&pts), &raw(&moved), &MatchParams::default());
            let correct = r.matches.iter().filter(|e| e.left == e.right).count();
            assert!(correct >= 40, "{correct}");
        }
    }

    #[test]
    fn impostor_clouds_score_low() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let a = raw(&cloud(&mut rng, 50, 250.0));
            let b = raw(&cloud(&mut rng, 50, 250.0));
            let r = shape_fallback_match(&a, &b, &MatchParams::default());
            assert!(r.score < 0.25 * 50.0, "{}", r.score);
        }
    }

    #[test]
    fn tiny_or_degenerate_inputs_are_empty() {
        let three = raw(&[Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(0.0, 5.0)]);
        assert_eq!(shape_fallback_match(&three, &three, &MatchParams::default()).score, 0.0);
        let clump = raw(&[Point::new(1.0, 1.0); 6]);
        let r = shape_fallback_match(&clump, &clump, &MatchParams::default());
        assert!(r.matches.is_empty());
        assert_eq!(r.mode, MatchMode::ShapeFallback);
    }
}
