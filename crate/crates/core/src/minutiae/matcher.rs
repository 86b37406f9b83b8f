

use super::{MinutiaPair, MinutiaPairSet, MinutiaeTemplate};
use crate::geometry::wrap_angle;

/// Settings for the neighbourhood-descriptor minutiae matcher.
#[derive(Debug, Clone, PartialEq)]
pub struct MatcherParams {
    /// Neighbours per descriptor.
    pub neighbors: usize,
    /// Pixels charged per radian of angular disagreement.
    pub angle_weight: f64,
    /// Cost ceiling for a neighbour with no counterpart.
    pub missing_penalty: f64,
    /// Pair score is `exp(-distance / tau)`.
    pub tau: f64,
    /// Pairs whose inter-pair distances disagree by more than this are inconsistent.
    pub rigid_tolerance: f64,
    /// Descriptor distances above this never form a pair.
    pub max_distance: f64,
}

impl Default for MatcherParams {
    fn default() -> Self {
        MatcherParams {
            neighbors: 5,
            angle_weight: 20.0,
            missing_penalty: 40.0,
            tau: 20.0,
            rigid_tolerance: 15.0,
            max_distance: 150.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Neighbor {
    dist: f64,
    /// Direction to the neighbour relative to the minutia direction.
    bearing: f64,
    /// Neighbour direction relative to the minutia direction.
    heading: f64,
}

fn descriptors(t: &MinutiaeTemplate, k: usize) -> Vec<Vec<Neighbor>> {
    let m = &t.minutiae;
    (0..m.len())
        .map(|i| {
            let mut nb: Vec<(f64, usize)> = (0..m.len())
                .filter(|&j| j != i)
                .map(|j| (m[i].point().dist(m[j].point()), j))
                .collect();
            nb.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            nb.truncate(k);
            nb.into_iter()
                .map(|(dist, j)| Neighbor {
                    dist,
                    bearing: wrap_angle((m[j].y - m[i].y).atan2(m[j].x - m[i].x) - m[i].angle),
                    heading: wrap_angle(m[j].angle - m[i].angle),
                })
                .collect()
        })
        .collect()
}

fn neighbor_cost(a: &Neighbor, b: &Neighbor, p: &MatcherParams) -> f64 {
    (a.dist - b.dist).abs()
        + p.angle_weight * (wrap_angle(a.bearing - b.bearing).abs() + wrap_angle(a.heading - b.heading).abs()) / 2.0
}

/// Cost of explaining every neighbour of `a` by a distinct neighbour of `b`,
/// greedily, each term capped at the missing-neighbour penalty.
fn directed_cost(a: &[Neighbor], b: &[Neighbor], p: &MatcherParams) -> f64 {
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, na) in a.iter().enumerate() {
        for (j, nb) in b.iter().enumerate() {
            let c = neighbor_cost(na, nb, p);
            if c < p.missing_penalty {
                cand.push((c, i, j));
            }
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut total = 0.0;
    let mut matched = 0;
    for (c, i, j) in cand {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            total += c;
            matched += 1;
        }
    }
    total + (a.len() - matched) as f64 * p.missing_penalty
}

fn descriptor_distance(a: &[Neighbor], b: &[Neighbor], p: &MatcherParams) -> f64 {
    let n = a.len().max(b.len()).max(1) as f64;
    (directed_cost(a, b, p) + directed_cost(b, a, p)) / (2.0 * n)
}

/// Finds one-to-one minutia correspondences.
///
/// Descriptors are the `k` nearest neighbours of each minutia. Pairs are
/// formed greedily by ascending descriptor distance and then pruned until
/// every surviving pair is rigidly consistent with every other.
pub fn match_minutiae(
    latent: &MinutiaeTemplate,
    rolled: &MinutiaeTemplate,
    params: &MatcherParams,
) -> MinutiaPairSet {
    if latent.len() < 2 || rolled.len() < 2 {
        return MinutiaPairSet::default();
    }
    let dl = descriptors(latent, params.neighbors);
    let dr = descriptors(rolled, params.neighbors);

    let mut cand = Vec::new();
    for (i, a) in dl.iter().enumerate() {
        for (j, b) in dr.iter().enumerate() {
            let d = descriptor_distance(a, b, params);
            if d <= params.max_distance {
                cand.push((d, i, j));
            }
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used_l = vec![false; latent.len()];
    let mut used_r = vec![false; rolled.len()];
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (d, i, j) in cand {
        if !used_l[i] && !used_r[j] {
            used_l[i] = true;
            used_r[j] = true;
            pairs.push((d, i, j));
        }
    }

    prune_inconsistent(&mut pairs, latent, rolled, params.rigid_tolerance);

    let mut out: Vec<MinutiaPair> = pairs
        .into_iter()
        .map(|(d, i, j)| MinutiaPair {
            latent: i,
            rolled: j,
            score: (-d / params.tau).exp(),
        })
        .collect();
    out.sort_by_key(|p| (p.latent, p.rolled));
    MinutiaPairSet::new(out)
}

/// Repeatedly drops the pair with the most rigid-consistency violations
/// (ties: larger descriptor distance, then later position) until none remain.
fn prune_inconsistent(
    pairs: &mut Vec<(f64, usize, usize)>,
    latent: &MinutiaeTemplate,
    rolled: &MinutiaeTemplate,
    tol: f64,
) {
    let n = pairs.len();
    let mut bad = vec![vec![false; n]; n];
    let mut count = vec![0usize; n];
    for a in 0..n {
        for b in a + 1..n {
            let (_, la, ra) = pairs[a];
            let (_, lb, rb) = pairs[b];
            let dl = latent.minutiae[la].point().dist(latent.minutiae[lb].point());
            let dr = rolled.minutiae[ra].point().dist(rolled.minutiae[rb].point());
            if (dl - dr).abs() > tol {
                bad[a][b] = true;
                bad[b][a] = true;
                count[a] += 1;
                count[b] += 1;
            }
        }
    }
    let mut alive = vec![true; n];
    loop {
        let worst = (0..n).filter(|&i| alive[i] && count[i] > 0).max_by(|&a, &b| {
            count[a]
                .cmp(&count[b])
                .then(pairs[a].0.total_cmp(&pairs[b].0))
                .then(a.cmp(&b))
        });
        let Some(w) = worst else { break };
        alive[w] = false;
        for i in 0..n {
            if alive[i] && bad[w][i] {
                count[i] -= 1;
            }
        }
    }
    let mut keep = alive.into_iter();
    pairs.retain(|_| keep.next().unwrap());
}
