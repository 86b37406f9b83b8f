//! Detection scoring against ground truth and the corpus benchmark runner.

mod benchmark;
mod truth;

pub use benchmark::{
    parse_manifest, run_benchmark, BenchmarkConfig, BenchmarkReport, BenchmarkRow, ManifestEntry,
    CSV_HEADER,
};
pub use truth::{parse_ground_truth, read_ground_truth, write_ground_truth};

use crate::assignment::{max_weight_matching, BipartiteGraph};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::pores::PoreTemplate;

/// Default scoring radius at 1000 ppi.
pub const DEFAULT_RADIUS_AT_1000PPI: f64 = 5.0;

pub fn default_radius(ppi: u32) -> f64 {
    DEFAULT_RADIUS_AT_1000PPI * ppi as f64 / 1000.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthPores {
    pub source_id: String,
    pub ppi: u32,
    pub points: Vec<Point>,
}

impl GroundTruthPores {
    pub fn new(source_id: impl Into<String>, ppi: u32, points: Vec<Point>) -> Self {
        GroundTruthPores {
            source_id: source_id.into(),
            ppi,
            points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub match_radius: f64,
    /// Set when any of the three ratios had a zero denominator.
    pub degenerate: bool,
}

impl DetectionReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, match_radius: f64) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                None
            } else {
                Some(num as f64 / den as f64)
            }
        };
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fn_);
        let precision = p.unwrap_or(0.0);
        let recall = r.unwrap_or(0.0);
        let f1 = f1_score(precision, recall);
        DetectionReport {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
            match_radius,
            degenerate: p.is_none() || r.is_none() || precision + recall == 0.0,
        }
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Scores detections against truth with a one-to-one assignment.
///
/// Pairs closer than `radius` (inclusive) are eligible. Edge weights put
/// the number of pairs first and closeness second, so the assignment never
/// finds fewer true positives than any greedy pairing would.
pub fn score_detections(
    detected: &PoreTemplate,
    truth: &GroundTruthPores,
    radius: f64,
) -> Result<DetectionReport> {
    if detected.ppi != truth.ppi {
        return Err(Error::PpiMismatch {
            left: detected.ppi,
            right: truth.ppi,
        });
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!("match radius {radius} must be positive")));
    }
    let det = detected.points();
    let tp = one_to_one_count(&det, &truth.points, radius);
    Ok(DetectionReport::from_counts(
        tp,
        det.len() - tp,
        truth.points.len() - tp,
        radius,
    ))
}

fn one_to_one_count(a: &[Point], b: &[Point], radius: f64) -> usize {
    let mut g = BipartiteGraph::new(a.len(), b.len());
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| b[i].x.total_cmp(&b[j].x));
    let xs: Vec<f64> = order.iter().map(|&i| b[i].x).collect();
    let mut raw = Vec::new();
    for (i, p) in a.iter().enumerate() {
        let lo = xs.partition_point(|&x| x < p.x - radius);
        for &j in &order[lo..] {
            if b[j].x > p.x + radius {
                break;
            }
            let d = p.dist(b[j]);
            if d <= radius {
                raw.push((i, j, d));
            }
        }
    }
    let scale = radius * (raw.len() + 1) as f64;
    for (i, j, d) in raw {
        g.add_edge(i, j, 1.0 + (radius - d) / scale);
    }
    max_weight_matching(&g).len()
}
