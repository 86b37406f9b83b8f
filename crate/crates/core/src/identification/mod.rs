//! Gallery search: minutiae ranking, the pore gate, top-N rank fusion and
//! CMC curves.

mod gallery;

pub use gallery::{parse_score_file, Gallery, GalleryEntry};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{match_pores, MatchParams};
use crate::minutiae::{match_minutiae, MatcherParams, MinutiaeTemplate};
use crate::pores::PoreTemplate;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub id: String,
    pub minutiae_score: f64,
    /// 1-based.
    pub minutiae_index: usize,
    pub pore_score: Option<f64>,
    /// 1-based rank within the re-ranked block.
    pub pore_index: Option<usize>,
    /// 1-based.
    pub final_index: usize,
}

/// Sorts `(id, score)` pairs by descending score (ties by id) into a rank list.
pub fn rank_scores(scores: Vec<(String, f64)>) -> Vec<RankedCandidate> {
    let mut scores = scores;
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scores
        .into_iter()
        .enumerate()
        .map(|(i, (id, s))| RankedCandidate {
            id,
            minutiae_score: s,
            minutiae_index: i + 1,
            pore_score: None,
            pore_index: None,
            final_index: i + 1,
        })
        .collect()
}

/// Scores every gallery entry against the latent minutiae and ranks them.
pub fn identify_minutiae(
    latent: &MinutiaeTemplate,
    gallery: &Gallery,
    params: &MatcherParams,
) -> Vec<RankedCandidate> {
    let scores = gallery
        .entries()
        .par_iter()
        .map(|e| (e.id.clone(), match_minutiae(latent, &e.minutiae, params).total_score))
        .collect();
    rank_scores(scores)
}

/// Ranks the gallery by externally supplied scores, one per gallery entry.
pub fn identify_with_scores(scores: Vec<(String, f64)>, gallery: &Gallery) -> Result<Vec<RankedCandidate>> {
    let mut seen = std::collections::HashSet::new();
    for (id, _) in &scores {
        if gallery.get(id).is_none() {
            return Err(Error::domain(format!("score for unknown gallery id {id:?}")));
        }
        if !seen.insert(id.as_str()) {
            return Err(Error::domain(format!("duplicate score for {id:?}")));
        }
    }
    if let Some(e) = gallery.entries().iter().find(|e| !seen.contains(e.id.as_str())) {
        return Err(Error::domain(format!("no score for gallery id {:?}", e.id)));
    }
    Ok(rank_scores(scores))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    /// Latents with fewer minutiae than this always consult pores.
    pub min_minutiae: usize,
    /// Relative margin of the best score over the runner-up below which
    /// pores are consulted.
    pub gap: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams {
            min_minutiae: 15,
            gap: 0.1,
        }
    }
}

/// Whether the minutiae evidence is weak enough to bring in pores.
pub fn should_apply_pores(latent: &MinutiaeTemplate, list: &[RankedCandidate], gate: &GateParams) -> bool {
    if latent.len() < gate.min_minutiae {
        return true;
    }
    let s1 = list.first().map_or(0.0, |c| c.minutiae_score);
    let s2 = list.get(1).map_or(0.0, |c| c.minutiae_score);
    (s1 - s2) / s1.max(f64::EPSILON) < gate.gap
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankParams {
    /// Size of the block re-ranked at the top of the list.
    pub n: usize,
    /// Weight of the minutiae index in the fused index.
    pub w: f64,
    pub matcher: MatcherParams,
    pub matching: MatchParams,
}

impl Default for RerankParams {
    fn default() -> Self {
        RerankParams {
            n: 5,
            w: 0.5,
            matcher: MatcherParams::default(),
            matching: MatchParams::default(),
        }
    }
}

/// Fuses given pore scores for the first `pore_scores.len()` candidates.
///
/// Pore indices rank the block by descending pore score (ties by minutiae
/// index). The block is reordered by `w * minutiae_index + (1 - w) *
/// pore_index`, ties again by minutiae index; the rest keep their order.
pub fn fuse_ranks(list: &[RankedCandidate], pore_scores: &[f64], w: f64) -> Vec<RankedCandidate> {
    let mut out: Vec<RankedCandidate> = list.to_vec();
    out.sort_by_key(|c| c.minutiae_index);
    let k = pore_scores.len().min(out.len());
    let mut by_pore: Vec<usize> = (0..k).collect();
    by_pore.sort_by(|&a, &b| {
        pore_scores[b]
            .total_cmp(&pore_scores[a])
            .then(out[a].minutiae_index.cmp(&out[b].minutiae_index))
    });
    for (rank, &i) in by_pore.iter().enumerate() {
        out[i].pore_score = Some(pore_scores[i]);
        out[i].pore_index = Some(rank + 1);
    }
    let combined = |c: &RankedCandidate| w * c.minutiae_index as f64 + (1.0 - w) * c.pore_index.unwrap() as f64;
    out[..k].sort_by(|a, b| {
        combined(a)
            .total_cmp(&combined(b))
            .then(a.minutiae_index.cmp(&b.minutiae_index))
    });
    for (i, c) in out.iter_mut().enumerate() {
        c.final_index = i + 1;
    }
    out
}

/// Matches pores for the top `n` candidates and fuses the two rank orders.
pub fn rerank(
    list: &[RankedCandidate],
    latent_minutiae: &MinutiaeTemplate,
    latent_pores: &PoreTemplate,
    gallery: &Gallery,
    params: &RerankParams,
) -> Result<Vec<RankedCandidate>> {
    if params.n == 0 {
        return Err(Error::domain("re-ranking block size must be at least 1"));
    }
    if !(0.0..=1.0).contains(&params.w) {
        return Err(Error::domain("fusion weight must lie in [0, 1]"));
    }
    let mut ordered: Vec<&RankedCandidate> = list.iter().collect();
    ordered.sort_by_key(|c| c.minutiae_index);
    let k = params.n.min(ordered.len());
    let scores = ordered[..k]
        .par_iter()
        .map(|c| {
            let entry = gallery
                .get(&c.id)
                .ok_or_else(|| Error::domain(format!("candidate {:?} not in gallery", c.id)))?;
            let pairs = match_minutiae(latent_minutiae, &entry.minutiae, &params.matcher);
            let r = match_pores(
                latent_pores,
                &entry.pores,
                &pairs,
                latent_minutiae,
                &entry.minutiae,
                &params.matching,
            )?;
            Ok(r.score)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(fuse_ranks(list, &scores, params.w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationOutcome {
    pub candidates: Vec<RankedCandidate>,
    pub pores_applied: bool,
}

/// Minutiae ranking, then pore re-ranking when the gate asks for it.
pub fn identify(
    latent_minutiae: &MinutiaeTemplate,
    latent_pores: &PoreTemplate,
    gallery: &Gallery,
    gate: &GateParams,
    params: &RerankParams,
) -> Result<IdentificationOutcome> {
    let list = identify_minutiae(latent_minutiae, gallery, &params.matcher);
    if list.is_empty() || !should_apply_pores(latent_minutiae, &list, gate) {
        return Ok(IdentificationOutcome {
            candidates: list,
            pores_applied: false,
        });
    }
    Ok(IdentificationOutcome {
        candidates: rerank(&list, latent_minutiae, latent_pores, gallery, params)?,
        pores_applied: true,
    })
}

/// Cumulative identification rate per rank.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve {
    /// Entry `r - 1` is the fraction of trials with the mate at rank `<= r`.
    pub hits_at_rank: Vec<f64>,
}

impl CmcCurve {
    pub fn rank(&self, r: usize) -> f64 {
        match r {
            0 => 0.0,
            r => *self.hits_at_rank.get(r - 1).or(self.hits_at_rank.last()).unwrap_or(&0.0),
        }
    }
}

/// Builds a CMC curve from `(mate rank, gallery size)` trials, out to the
/// largest gallery size.
pub fn compute_cmc(trials: &[(usize, usize)]) -> Result<CmcCurve> {
    if trials.is_empty() {
        return Err(Error::domain("CMC needs at least one trial"));
    }
    for &(rank, size) in trials {
        if rank == 0 || rank > size {
            return Err(Error::domain(format!("mate rank {rank} outside 1..={size}")));
        }
    }
    let r_max = trials.iter().map(|t| t.1).max().unwrap();
    let mut counts = vec![0usize; r_max + 1];
    for &(rank, _) in trials {
        counts[rank] += 1;
    }
    let mut hits = Vec::with_capacity(r_max);
    let mut acc = 0;
    for c in &counts[1..] {
        acc += c;
        hits.push(acc as f64 / trials.len() as f64);
    }
    Ok(CmcCurve { hits_at_rank: hits })
}

/// 1-based final position of `id` in a rank list.
pub fn final_rank_of(list: &[RankedCandidate], id: &str) -> Option<usize> {
    list.iter().find(|c| c.id == id).map(|c| c.final_index)
}
