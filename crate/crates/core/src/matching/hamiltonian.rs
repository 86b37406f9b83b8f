use crate::pores::PoreTemplate;

/// Greedy nearest-neighbour path through every pore.
///
/// Starts at the pore farthest from the centroid and keeps hopping to the
/// nearest unvisited pore. Distances within a relative 1e-9 count as ties,
/// which go to the pore with the smaller `(y, x)`. For templates in
/// canonical order that is the lower index, and unlike a pure index rule it
/// does not depend on the input order.
pub fn hamiltonian_order(pores: &PoreTemplate) -> Vec<usize> {
    let pts = pores.points();
    let n = pts.len();
    if n == 0 {
        return Vec::new();
    }
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n as f64;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n as f64;
    let c = crate::geometry::Point::new(cx, cy);
    let mut start = 0;
    for i in 1..n {
        if prefer(pts[start].dist_sq(c), pts[i].dist_sq(c), &pts[start], &pts[i]) {
            start = i;
        }
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let d = pts[cur].dist_sq(pts[j]);
                if best == usize::MAX || prefer(-best_d, -d, &pts[best], &pts[j]) {
                    best_d = d;
                    best = j;
                }
            }
        }
        cur = best;
        visited[cur] = true;
        order.push(cur);
    }
    order
}

/// Whether a candidate with key `new` beats the incumbent with key `old`
/// (larger wins), with near-equal keys settled by coordinates.
fn prefer(old: f64, new: f64, po: &crate::geometry::Point, pn: &crate::geometry::Point) -> bool {
    let tol = 1e-9 * old.abs().max(new.abs()).max(1e-12);
    if (new - old).abs() <= tol {
        (pn.y, pn.x) < (po.y, po.x)
    } else {
        new > old
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pores::Pore;
    use proptest::prelude::*;

    fn raw(points: &[(f64, f64)]) -> PoreTemplate {
        // Bypass the constructor's sorting so index order is exactly as given.
        PoreTemplate {
            source_id: "t".into(),
            ppi: 1000,
            pores: points.iter().map(|&(x, y)| Pore::at(x, y)).collect(),
        }
    }

    #[test]
    fn single_pore() {
        assert_eq!(hamiltonian_order(&raw(&[(3.0, 4.0)])), vec![0]);
    }

    #[test]
    fn collinear_endpoints_tie_to_lower_index() {
        assert_eq!(hamiltonian_order(&raw(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)])), vec![0, 1, 2]);
        assert_eq!(hamiltonian_order(&raw(&[(20.0, 0.0), (10.0, 0.0), (0.0, 0.0)])), vec![2, 1, 0]);
    }

    proptest! {
        #[test]
        fn path_is_input_order_invariant(
            pts in prop::collection::vec((0u32..10_000, 0u32..10_000), 1..40),
            seed in any::<u64>(),
        ) {
            // Distinct irrational-ish coordinates keep ties out of the picture.
            let pts: Vec<(f64, f64)> = pts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| (x as f64 * 0.0137 + i as f64 * 1e-4, y as f64 * 0.0173))
                .collect();
            let mut perm: Vec<usize> = (0..pts.len()).collect();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let shuffled: Vec<(f64, f64)> = perm.iter().map(|&i| pts[i]).collect();
            let a: Vec<(f64, f64)> = hamiltonian_order(&raw(&pts)).into_iter().map(|i| pts[i]).collect();
            let b: Vec<(f64, f64)> = hamiltonian_order(&raw(&shuffled)).into_iter().map(|i| shuffled[i]).collect();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn path_is_a_permutation(pts in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..60)) {
            let mut o = hamiltonian_order(&raw(&pts));
            o.sort();
            prop_assert_eq!(o, (0..pts.len()).collect::<Vec<_>>());
        }
    }
}
