use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::{default_radius, read_ground_truth, score_detections, DetectionReport};
use crate::enhancement::EnhancementParams;
use crate::error::{Error, Result};
use crate::imaging::load_image;
use crate::pores::{ExtractionParams, PoreExtractor};

pub const CSV_HEADER: &str = "image,confidence,tp,fp,fn,precision,recall,f1,extract_ms";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub truth: PathBuf,
}

/// Parses `image_path truth_path` lines. Relative paths resolve against
/// `base`; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::parse(i + 1, "expected `image_path truth_path`"));
        }
        out.push(ManifestEntry {
            image: base.join(f[0]),
            truth: base.join(f[1]),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub confidences: Vec<f64>,
    pub enhancement: EnhancementParams,
    pub extraction: ExtractionParams,
    /// Scoring radius at 1000 ppi; scaled with each image's resolution.
    pub radius_at_1000ppi: f64,
    pub ppi_override: Option<u32>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            confidences: vec![30.0, 50.0, 70.0],
            enhancement: EnhancementParams::default(),
            extraction: ExtractionParams::default(),
            radius_at_1000ppi: super::DEFAULT_RADIUS_AT_1000PPI,
            ppi_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub image: String,
    pub confidence: f64,
    pub report: DetectionReport,
    pub extract_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    /// Per-image rows in manifest order, confidences in sweep order.
    pub rows: Vec<BenchmarkRow>,
    /// Micro-averaged rows labelled `ALL`, one per confidence; `extract_ms`
    /// is the mean over the images that ran.
    pub aggregates: Vec<BenchmarkRow>,
    /// Entries that could not be evaluated, with the reason.
    pub failures: Vec<(String, String)>,
}

impl BenchmarkReport {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in self.rows.iter().chain(&self.aggregates) {
            let d = &r.report;
            writeln!(
                s,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{:.3}",
                r.image,
                r.confidence,
                d.true_positives,
                d.false_positives,
                d.false_negatives,
                d.precision,
                d.recall,
                d.f1,
                r.extract_ms
            )
            .unwrap();
        }
        s
    }
}

fn evaluate_entry(entry: &ManifestEntry, cfg: &BenchmarkConfig) -> Result<Vec<BenchmarkRow>> {
    let img = load_image(&entry.image, cfg.ppi_override)?;
    let mut truth = read_ground_truth(&entry.truth)?;
    if let Some(ppi) = cfg.ppi_override {
        truth.ppi = ppi;
    }
    let radius = default_radius(img.ppi()) * cfg.radius_at_1000ppi / super::DEFAULT_RADIUS_AT_1000PPI;
    let name = entry.image.display().to_string();
    let mut rows = Vec::with_capacity(cfg.confidences.len());
    for &c in &cfg.confidences {
        let params = ExtractionParams {
            confidence: c,
            ..cfg.extraction.clone()
        };
        let extractor = PoreExtractor::stft(cfg.enhancement.clone(), params)?;
        let start = Instant::now();
        let detected = extractor.extract(&img, &truth.source_id)?;
        let extract_ms = start.elapsed().as_secs_f64() * 1000.0;
        rows.push(BenchmarkRow {
            image: name.clone(),
            confidence: c,
            report: score_detections(&detected, &truth, radius)?,
            extract_ms,
        });
    }
    Ok(rows)
}

/// Runs extraction and scoring over every manifest entry and confidence.
///
/// Entries are processed in parallel but reported in manifest order. An
/// entry that fails to load or score is listed in `failures` and the run
/// carries on.
pub fn run_benchmark(entries: &[ManifestEntry], cfg: &BenchmarkConfig) -> BenchmarkReport {
    let results: Vec<Result<Vec<BenchmarkRow>>> =
        entries.par_iter().map(|e| evaluate_entry(e, cfg)).collect();
    let mut report = BenchmarkReport::default();
    for (entry, res) in entries.iter().zip(results) {
        match res {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report
                .failures
                .push((entry.image.display().to_string(), e.to_string())),
        }
    }
    for &c in &cfg.confidences {
        let rows: Vec<&BenchmarkRow> = report.rows.iter().filter(|r| r.confidence == c).collect();
        if rows.is_empty() {
            continue;
        }
        let sum = |f: fn(&DetectionReport) -> usize| rows.iter().map(|r| f(&r.report)).sum::<usize>();
        let tp = sum(|d| d.true_positives);
        let fp = sum(|d| d.false_positives);
        let fn_ = sum(|d| d.false_negatives);
        let radius = rows[0].report.match_radius;
        report.aggregates.push(BenchmarkRow {
            image: "ALL".into(),
            confidence: c,
            report: DetectionReport::from_counts(tp, fp, fn_, radius),
            extract_ms: rows.iter().map(|r| r.extract_ms).sum::<f64>() / rows.len() as f64,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let m = parse_manifest("# corpus\na.pgm a.gt\n\n sub/b.pgm b.gt \n", Path::new("/data")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].image, PathBuf::from("/data/sub/b.pgm"));
        assert!(parse_manifest("only_one\n", Path::new(".")).is_err());
    }

    #[test]
    fn missing_files_are_listed_not_fatal() {
        let entries = vec![ManifestEntry {
            image: PathBuf::from("/nonexistent/x.pgm"),
            truth: PathBuf::from("/nonexistent/x.gt"),
        }];
        let r = run_benchmark(&entries, &BenchmarkConfig::default());
        assert!(r.is_partial());
        assert!(r.rows.is_empty());
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
    }
}
