use poreid_core::assignment::{max_weight_matching, BipartiteGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Edge = (usize, usize, f64);

/// `a` beats `b` under the tie-break when the smallest edge in their
/// symmetric difference belongs to `a`.
fn tie_break_prefers(a: &[Edge], b: &[Edge]) -> bool {
    let key = |e: &Edge| (e.0, e.1);
    let in_a: Vec<_> = a.iter().map(key).collect();
    let in_b: Vec<_> = b.iter().map(key).collect();
    let mut diff: Vec<(usize, usize)> = in_a
        .iter()
        .filter(|k| !in_b.contains(k))
        .chain(in_b.iter().filter(|k| !in_a.contains(k)))
        .copied()
        .collect();
    diff.sort();
    diff.first().is_some_and(|k| in_a.contains(k))
}

fn enumerate(
    edges_by_left: &[Vec<Edge>],
    l: usize,
    used: &mut Vec<bool>,
    cur: &mut Vec<Edge>,
    best: &mut (f64, Vec<Edge>),
) {
    if l == edges_by_left.len() {
        let score: f64 = cur.iter().map(|e| e.2).sum();
        if score > best.0 || (score == best.0 && tie_break_prefers(cur, &best.1)) {
            *best = (score, cur.clone());
        }
        return;
    }
    enumerate(edges_by_left, l + 1, used, cur, best);
    for &e in &edges_by_left[l] {
        if !used[e.1] {
            used[e.1] = true;
            cur.push(e);
            enumerate(edges_by_left, l + 1, used, cur, best);
            cur.pop();
            used[e.1] = false;
        }
    }
}

fn random_graph(rng: &mut ChaCha8Rng, dyadic: bool) -> (BipartiteGraph, Vec<Vec<Edge>>) {
    let nl = rng.random_range(0..=6);
    let nr = rng.random_range(0..=6);
    let mut g = BipartiteGraph::new(nl, nr);
    let mut by_left = vec![Vec::new(); nl];
    if nl == 0 || nr == 0 {
        return (g, by_left);
    }
    let mut all: Vec<(usize, usize)> = (0..nl).flat_map(|l| (0..nr).map(move |r| (l, r))).collect();
    let m = rng.random_range(0..=all.len().min(20));
    for i in 0..m {
        let j = rng.random_range(i..all.len());
        all.swap(i, j);
    }
    for &(l, r) in &all[..m] {
        let w = if dyadic {
            rng.random_range(1..=8) as f64 / 8.0
        } else {
            rng.random_range(0.001..1.0)
        };
        g.add_edge(l, r, w);
        by_left[l].push((l, r, w));
    }
    for v in &mut by_left {
        v.sort_by_key(|e| e.1);
    }
    (g, by_left)
}

fn check(seed: u64, dyadic: bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, by_left) = random_graph(&mut rng, dyadic);
    let mut best = (0.0, Vec::new());
    enumerate(&by_left, 0, &mut vec![false; g.n_right], &mut Vec::new(), &mut best);
    let m = max_weight_matching(&g);
    let got: Vec<Edge> = m.pairs.iter().map(|e| (e.left, e.right, e.weight)).collect();
    assert_eq!(m.score, best.0, "seed {seed}: score");
    assert_eq!(got, best.1, "seed {seed}: edge set");
}

#[test]
fn dyadic_weights_with_ties_match_enumeration() {
    for seed in 0..300 {
        check(seed, true);
    }
}

#[test]
fn continuous_weights_match_enumeration() {
    for seed in 1000..1300 {
        check(seed, false);
    }
}

#[test]
fn larger_uniform_weight_grids_are_canonical() {
    // 6x6 complete graph with equal weights: identity permutation wins.
    let mut g = BipartiteGraph::new(6, 6);
    for l in 0..6 {
        for r in 0..6 {
            g.add_edge(l, r, 0.5);
        }
    }
    let m = max_weight_matching(&g);
    let pairs: Vec<_> = m.pairs.iter().map(|e| (e.left, e.right)).collect();
    assert_eq!(pairs, (0..6).map(|i| (i, i)).collect::<Vec<_>>());
    assert_eq!(m.score, 3.0);
}
