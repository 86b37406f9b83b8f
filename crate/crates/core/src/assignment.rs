//! Maximum-weight bipartite matching with a deterministic tie-break.
//!
//! Weights are quantized to a power-of-two grid so every comparison is
//! exact. The optimum comes from a primal-dual Hungarian search (Dijkstra
//! over reduced costs, vertex duals kept non-negative), which also yields
//! an optimal dual. Every optimal matching uses only dual-tight edges and
//! covers every vertex with a positive dual, so the tie-break runs inside
//! the tight subgraph: edges are visited in `(left, right)` order and each
//! is kept iff some optimal matching still contains it together with every
//! edge kept so far.
//!
//! Tie-break: among optimal matchings, the one whose smallest differing
//! edge (in `(left, right)` order) it contains.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub left: usize,
    pub right: usize,
    pub weight: f64,
}

impl WeightedEdge {
    pub fn new(left: usize, right: usize, weight: f64) -> Self {
        WeightedEdge {
            left,
            right,
            weight,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BipartiteGraph {
    pub n_left: usize,
    pub n_right: usize,
    pub edges: Vec<WeightedEdge>,
}

impl BipartiteGraph {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        BipartiteGraph {
            n_left,
            n_right,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, left: usize, right: usize, weight: f64) {
        assert!(left < self.n_left && right < self.n_right, "edge endpoint out of range");
        self.edges.push(WeightedEdge::new(left, right, weight));
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    /// Sorted by `(left, right)`.
    pub pairs: Vec<WeightedEdge>,
    /// Sum of `pairs` weights, accumulated in `pairs` order.
    pub score: f64,
}

impl Matching {
    pub fn from_pairs(mut pairs: Vec<WeightedEdge>) -> Self {
        pairs.sort_by_key(|e| (e.left, e.right));
        let score = pairs.iter().map(|e| e.weight).sum();
        Matching { pairs, score }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

const NONE: usize = usize::MAX;

struct Quantized {
    /// `(left, right, weight, original)`, sorted and deduplicated.
    edges: Vec<(usize, usize, i64, f64)>,
    /// Per left vertex: indices into `edges`.
    adj: Vec<Vec<usize>>,
}

fn quantize(g: &BipartiteGraph) -> Quantized {
    let mut raw: Vec<&WeightedEdge> = g
        .edges
        .iter()
        .filter(|e| e.weight.is_finite() && e.weight > 0.0)
        .collect();
    raw.sort_by(|a, b| {
        (a.left, a.right)
            .cmp(&(b.left, b.right))
            .then(b.weight.total_cmp(&a.weight))
    });
    raw.dedup_by_key(|e| (e.left, e.right));
    let max_w = raw.iter().map(|e| e.weight).fold(0.0, f64::max);
    let mut edges = Vec::with_capacity(raw.len());
    if max_w > 0.0 {
        // Largest weight lands in [2^39, 2^40]; dyadic weights stay exact.
        let exp = 40 - max_w.log2().ceil() as i32;
        let scale = 2f64.powi(exp);
        for e in raw {
            let q = (e.weight * scale).round() as i64;
            if q > 0 {
                edges.push((e.left, e.right, q, e.weight));
            }
        }
    }
    let mut adj = vec![Vec::new(); g.n_left];
    for (i, e) in edges.iter().enumerate() {
        adj[e.0].push(i);
    }
    Quantized { edges, adj }
}

struct Solver<'a> {
    q: &'a Quantized,
    y_left: Vec<i64>,
    y_right: Vec<i64>,
    match_left: Vec<usize>,
    match_right: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(q: &'a Quantized, n_left: usize, n_right: usize) -> Self {
        let mut y_left = vec![0i64; n_left];
        for &(l, _, w, _) in &q.edges {
            y_left[l] = y_left[l].max(w);
        }
        Solver {
            q,
            y_left,
            y_right: vec![0; n_right],
            match_left: vec![NONE; n_left],
            match_right: vec![NONE; n_right],
        }
    }

    fn solve(&mut self) {
        let n_right = self.y_right.len();
        let mut dist = vec![i64::MAX; n_right];
        let mut pred = vec![NONE; n_right];
        let mut done = vec![false; n_right];
        let mut touched_right: Vec<usize> = Vec::new();
        let mut tree_left: Vec<(usize, i64)> = Vec::new();
        let mut heap = BinaryHeap::new();
        for root in 0..self.y_left.len() {
            if self.y_left[root] == 0 || self.match_left[root] != NONE {
                continue;
            }
            for &r in &touched_right {
                dist[r] = i64::MAX;
                pred[r] = NONE;
                done[r] = false;
            }
            touched_right.clear();
            tree_left.clear();
            heap.clear();

            // Terminal: (value, right end) or (value, left end).
            let mut best = self.y_left[root];
            let mut end_right = NONE;
            let mut end_left = root;
            tree_left.push((root, 0));
            self.relax(root, 0, &mut dist, &mut pred, &done, &mut touched_right, &mut heap);
            while let Some(Reverse((d, r))) = heap.pop() {
                if done[r] || d > dist[r] {
                    continue;
                }
                if d >= best {
                    break;
                }
                done[r] = true;
                let l2 = self.match_right[r];
                if l2 == NONE {
                    best = d;
                    end_right = r;
                    end_left = NONE;
                    break;
                }
                tree_left.push((l2, d));
                if d + self.y_left[l2] < best {
                    best = d + self.y_left[l2];
                    end_left = l2;
                }
                self.relax(l2, d, &mut dist, &mut pred, &done, &mut touched_right, &mut heap);
            }

            for &(l, dl) in &tree_left {
                self.y_left[l] -= best - dl;
            }
            for &r in &touched_right {
                if done[r] {
                    self.y_right[r] += best - dist[r];
                }
            }

            let mut r_cur = if end_right != NONE {
                end_right
            } else if end_left == root {
                continue;
            } else {
                let r = self.match_left[end_left];
                self.match_left[end_left] = NONE;
                r
            };
            loop {
                let l = pred[r_cur];
                let next = self.match_left[l];
                self.match_left[l] = r_cur;
                self.match_right[r_cur] = l;
                if l == root {
                    break;
                }
                r_cur = next;
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn relax(
        &self,
        l: usize,
        dl: i64,
        dist: &mut [i64],
        pred: &mut [usize],
        done: &[bool],
        touched: &mut Vec<usize>,
        heap: &mut BinaryHeap<Reverse<(i64, usize)>>,
    ) {
        for &ei in &self.q.adj[l] {
            let (_, r, w, _) = self.q.edges[ei];
            if done[r] {
                continue;
            }
            let reduced = self.y_left[l] + self.y_right[r] - w;
            debug_assert!(reduced >= 0);
            let nd = dl + reduced;
            if nd < dist[r] {
                if dist[r] == i64::MAX {
                    touched.push(r);
                }
                dist[r] = nd;
                pred[r] = l;
                heap.push(Reverse((nd, r)));
            }
        }
    }

    fn is_tight(&self, ei: usize) -> bool {
        let (l, r, w, _) = self.q.edges[ei];
        self.y_left[l] + self.y_right[r] == w
    }
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Is there a matching over `edges` (local indices) covering every left
/// vertex in `must_left`? Kuhn's augmenting paths.
fn covers(
    edges: &[(usize, usize)],
    n_left: usize,
    n_right: usize,
    must_left: &[usize],
) -> bool {
    let mut adj = vec![Vec::new(); n_left];
    for &(l, r) in edges {
        adj[l].push(r);
    }
    let mut match_r = vec![NONE; n_right];
    let mut seen = vec![0usize; n_right];
    let mut stamp = 0;
    fn augment(
        l: usize,
        adj: &[Vec<usize>],
        match_r: &mut [usize],
        seen: &mut [usize],
        stamp: usize,
    ) -> bool {
        for &r in &adj[l] {
            if seen[r] == stamp {
                continue;
            }
            seen[r] = stamp;
            if match_r[r] == NONE || augment(match_r[r], adj, match_r, seen, stamp) {
                match_r[r] = l;
                return true;
            }
        }
        false
    }
    for &l in must_left {
        stamp += 1;
        if !augment(l, &adj, &mut match_r, &mut seen, stamp) {
            return false;
        }
    }
    true
}

/// Greedy tie-break inside one connected component of the tight subgraph.
/// `edges` are global edge indices sorted by `(left, right)`.
fn canonical_component(
    q: &Quantized,
    edges: &[usize],
    positive_left: &dyn Fn(usize) -> bool,
    positive_right: &dyn Fn(usize) -> bool,
) -> Vec<usize> {
    let mut lefts: Vec<usize> = edges.iter().map(|&e| q.edges[e].0).collect();
    let mut rights: Vec<usize> = edges.iter().map(|&e| q.edges[e].1).collect();
    lefts.sort_unstable();
    lefts.dedup();
    rights.sort_unstable();
    rights.dedup();
    let li = |l: usize| lefts.binary_search(&l).unwrap();
    let ri = |r: usize| rights.binary_search(&r).unwrap();
    let local: Vec<(usize, usize)> = edges
        .iter()
        .map(|&e| (li(q.edges[e].0), ri(q.edges[e].1)))
        .collect();
    let must_l: Vec<usize> = (0..lefts.len()).filter(|&i| positive_left(lefts[i])).collect();
    let must_r: Vec<usize> = (0..rights.len()).filter(|&i| positive_right(rights[i])).collect();

    let mut used_l = vec![false; lefts.len()];
    let mut used_r = vec![false; rights.len()];
    let mut excluded = vec![false; local.len()];
    let mut kept = Vec::new();
    for k in 0..local.len() {
        let (l, r) = local[k];
        if used_l[l] || used_r[r] {
            excluded[k] = true;
            continue;
        }
        used_l[l] = true;
        used_r[r] = true;
        let rest: Vec<(usize, usize)> = local
            .iter()
            .enumerate()
            .filter(|&(j, &(a, b))| !excluded[j] && !used_l[a] && !used_r[b])
            .map(|(_, &e)| e)
            .collect();
        let need_l: Vec<usize> = must_l.iter().copied().filter(|&v| !used_l[v]).collect();
        let need_r: Vec<usize> = must_r.iter().copied().filter(|&v| !used_r[v]).collect();
        let flipped: Vec<(usize, usize)> = rest.iter().map(|&(a, b)| (b, a)).collect();
        // Mendelsohn-Dulmage: separate left and right covers imply a joint one.
        let feasible = covers(&rest, lefts.len(), rights.len(), &need_l)
            && covers(&flipped, rights.len(), lefts.len(), &need_r);
        if feasible {
            kept.push(edges[k]);
        } else {
            used_l[l] = false;
            used_r[r] = false;
            excluded[k] = true;
        }
    }
    kept
}

/// Maximum-total-weight matching; non-positive and non-finite edges are
/// ignored, duplicate `(left, right)` edges keep their largest weight.
pub fn max_weight_matching(g: &BipartiteGraph) -> Matching {
    let q = quantize(g);
    if q.edges.is_empty() {
        return Matching::default();
    }
    let mut solver = Solver::new(&q, g.n_left, g.n_right);
    solver.solve();

    let tight: Vec<usize> = (0..q.edges.len()).filter(|&e| solver.is_tight(e)).collect();
    let mut sets = DisjointSets((0..g.n_left + g.n_right).collect());
    for &e in &tight {
        sets.union(q.edges[e].0, g.n_left + q.edges[e].1);
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &e in &tight {
        let root = sets.find(q.edges[e].0);
        groups.entry(root).or_default().push(e);
    }
    let mut chosen = Vec::new();
    for edges in groups.values() {
        let matched: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|&e| solver.match_left[q.edges[e].0] == q.edges[e].1)
            .collect();
        if matched.len() == edges.len() {
            chosen.extend(matched);
        } else {
            let pl = |l: usize| solver.y_left[l] > 0;
            let pr = |r: usize| solver.y_right[r] > 0;
            chosen.extend(canonical_component(&q, edges, &pl, &pr));
        }
    }
    Matching::from_pairs(
        chosen
            .into_iter()
            .map(|e| WeightedEdge::new(q.edges[e].0, q.edges[e].1, q.edges[e].3))
            .collect(),
    )
}
