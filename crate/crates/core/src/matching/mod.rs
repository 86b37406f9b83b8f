//! Pore-to-pore matching: transform-guided candidate graphs refined by a
//! maximum-weight one-to-one assignment, with a shape-context fallback when
//! too few minutiae agree to fix the alignment.

mod hamiltonian;
mod shape;

pub use hamiltonian::hamiltonian_order;
pub use shape::{shape_contexts, shape_fallback_match};

use crate::assignment::{max_weight_matching, BipartiteGraph, WeightedEdge};
use crate::error::{Error, Result};
use crate::geometry::{SimilarityTransform, ACCEPTED_SCALE};
use crate::minutiae::{estimate_transform, MinutiaPairSet, MinutiaeTemplate, TransformParams};
use crate::pores::PoreTemplate;

/// Candidate latent/rolled pore pairs; weights are `1 - d / delta`.
pub type PoreCandidateGraph = BipartiteGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    TransformGuided,
    ShapeFallback,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::TransformGuided => "transform-guided",
            MatchMode::ShapeFallback => "shape-fallback",
        }
    }
}

impl std::fmt::Display for MatchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoreMatchResult {
    /// One-to-one `(latent, rolled, weight)` triples sorted by `(latent, rolled)`.
    pub matches: Vec<WeightedEdge>,
    pub score: f64,
    pub mode: MatchMode,
    pub transform_used: Option<SimilarityTransform>,
}

impl PoreMatchResult {
    pub fn empty(mode: MatchMode) -> Self {
        PoreMatchResult {
            matches: Vec::new(),
            score: 0.0,
            mode,
            transform_used: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchParams {
    /// Match radius at 1000 ppi, scaled linearly with resolution.
    pub delta_at_1000ppi: f64,
    pub min_minutiae_pairs_for_transform: usize,
    /// `(radial, angular)` shape-context bins.
    pub shape_context_bins: (usize, usize),
    pub fallback_ransac_iters: usize,
    /// Rolled candidates kept per latent pore in the shape fallback.
    pub shape_candidates: usize,
    pub seed: u64,
    pub transform: TransformParams,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            delta_at_1000ppi: 10.0,
            min_minutiae_pairs_for_transform: 3,
            shape_context_bins: (5, 12),
            fallback_ransac_iters: 500,
            shape_candidates: 3,
            seed: 0x5eed,
            transform: TransformParams::default(),
        }
    }
}

impl MatchParams {
    pub fn delta(&self, ppi: u32) -> f64 {
        self.delta_at_1000ppi * ppi as f64 / 1000.0
    }
}

/// Connects every latent pore to each rolled pore lying strictly within
/// `delta` of its transformed position.
pub fn build_candidate_graph(
    latent: &PoreTemplate,
    rolled: &PoreTemplate,
    t: &SimilarityTransform,
    delta: f64,
) -> PoreCandidateGraph {
    let mut g = BipartiteGraph::new(latent.len(), rolled.len());
    if latent.is_empty() || rolled.is_empty() || delta <= 0.0 {
        return g;
    }
    let grid = SpatialGrid::new(rolled, delta);
    for (l, p) in latent.pores.iter().enumerate() {
        let q = t.apply(p.point());
        grid.for_each_near(q.x, q.y, |r| {
            let d = q.dist(rolled.pores[r].point());
            if d < delta {
                g.add_edge(l, r, 1.0 - d / delta);
            }
        });
    }
    g
}

/// Uniform bucket grid over rolled pore centres.
struct SpatialGrid {
    x0: f64,
    y0: f64,
    cell: f64,
    cols: usize,
    rows: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl SpatialGrid {
    fn new(t: &PoreTemplate, cell: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in &t.pores {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let cols = (((x1 - x0) / cell) as usize + 1).min(4096);
        let rows = (((y1 - y0) / cell) as usize + 1).min(4096);
        let cell_of = |x: f64, y: f64| {
            let c = (((x - x0) / cell) as usize).min(cols - 1);
            let r = (((y - y0) / cell) as usize).min(rows - 1);
            r * cols + c
        };
        let mut start = vec![0usize; cols * rows + 1];
        for p in &t.pores {
            start[cell_of(p.x, p.y) + 1] += 1;
        }
        for i in 1..start.len() {
            start[i] += start[i - 1];
        }
        let mut fill = start.clone();
        let mut items = vec![0usize; t.len()];
        for (i, p) in t.pores.iter().enumerate() {
            let c = cell_of(p.x, p.y);
            items[fill[c]] = i;
            fill[c] += 1;
        }
        SpatialGrid { x0, y0, cell, cols, rows, start, items }
    }

    fn for_each_near(&self, x: f64, y: f64, mut f: impl FnMut(usize)) {
        let fx = (x - self.x0) / self.cell;
        let fy = (y - self.y0) / self.cell;
        if !fx.is_finite() || !fy.is_finite() {
            return;
        }
        let c0 = (fx.floor() - 1.0).max(0.0);
        let r0 = (fy.floor() - 1.0).max(0.0);
        let c1 = (fx.floor() + 1.0).min(self.cols as f64 - 1.0);
        let r1 = (fy.floor() + 1.0).min(self.rows as f64 - 1.0);
        if c0 > c1 || r0 > r1 {
            return;
        }
        for r in r0 as usize..=r1 as usize {
            for c in c0 as usize..=c1 as usize {
                let cell = r * self.cols + c;
                for &i in &self.items[self.start[cell]..self.start[cell + 1]] {
                    f(i);
                }
            }
        }
    }
}

/// Runs the assignment on a candidate graph and wraps the result.
pub fn refine_matches(
    g: &PoreCandidateGraph,
    mode: MatchMode,
    transform_used: Option<SimilarityTransform>,
) -> PoreMatchResult {
    let m = max_weight_matching(g);
    PoreMatchResult {
        matches: m.pairs,
        score: m.score,
        mode,
        transform_used,
    }
}

/// Matches two pore templates.
///
/// With enough minutia correspondences the alignment comes from
/// [`estimate_transform`]; otherwise, or if that alignment is rejected,
/// the shape-context fallback estimates it from the pores alone.
pub fn match_pores(
    latent: &PoreTemplate,
    rolled: &PoreTemplate,
    minutiae_pairs: &MinutiaPairSet,
    mt_latent: &MinutiaeTemplate,
    mt_rolled: &MinutiaeTemplate,
    params: &MatchParams,
) -> Result<PoreMatchResult> {
    if latent.ppi != rolled.ppi {
        return Err(Error::PpiMismatch {
            left: latent.ppi,
            right: rolled.ppi,
        });
    }
    if minutiae_pairs.len() >= params.min_minutiae_pairs_for_transform.max(3) {
        match estimate_transform(minutiae_pairs, mt_latent, mt_rolled, &params.transform) {
            Ok(t) => {
                let g = build_candidate_graph(latent, rolled, &t, params.delta(latent.ppi));
                return Ok(refine_matches(&g, MatchMode::TransformGuided, Some(t)));
            }
            Err(
                Error::InsufficientPairs { .. }
                | Error::DegenerateSamples
                | Error::ScaleRejected { .. },
            ) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(shape_fallback_match(latent, rolled, params))
}

pub(crate) fn scale_bounds(params: &MatchParams) -> (f64, f64) {
    let (lo, hi) = params.transform.scale_bounds;
    (lo.max(ACCEPTED_SCALE.0), hi.min(ACCEPTED_SCALE.1))
}
