//! `key=value` configuration covering every pipeline tunable.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use poreid_core::enhancement::EnhancementParams;
use poreid_core::evaluation::DEFAULT_RADIUS_AT_1000PPI;
use poreid_core::identification::{GateParams, RerankParams};
use poreid_core::matching::MatchParams;
use poreid_core::minutiae::MatcherParams;
use poreid_core::pores::ExtractionParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub enhancement: EnhancementParams,
    pub extraction: ExtractionParams,
    pub matching: MatchParams,
    pub matcher: MatcherParams,
    pub gate: GateParams,
    pub rerank_n: usize,
    pub rerank_w: f64,
    pub confidences: Vec<f64>,
    pub radius_at_1000ppi: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            enhancement: EnhancementParams::default(),
            extraction: ExtractionParams::default(),
            matching: MatchParams::default(),
            matcher: MatcherParams::default(),
            gate: GateParams::default(),
            rerank_n: RerankParams::default().n,
            rerank_w: RerankParams::default().w,
            confidences: vec![30.0, 50.0, 70.0],
            radius_at_1000ppi: DEFAULT_RADIUS_AT_1000PPI,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("invalid value {value:?} for {key}"))
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Config {
    /// Every recognised key with its current value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let e = &self.enhancement;
        let x = &self.extraction;
        let m = &self.matching;
        let t = &m.transform.consensus;
        let k = &self.matcher;
        vec![
            ("enhance.block_size", e.block_size.to_string()),
            ("enhance.overlap", e.overlap.to_string()),
            ("enhance.orientation_smoothing_passes", e.orientation_smoothing_passes.to_string()),
            ("enhance.bandpass_bandwidth", e.bandpass_bandwidth.to_string()),
            ("enhance.angular_bandwidth", e.angular_bandwidth.to_string()),
            ("enhance.pore_band_gain", e.pore_band_gain.to_string()),
            ("enhance.pore_band_cutoff", e.pore_band_cutoff.to_string()),
            ("enhance.impulse_threshold", e.impulse_threshold.to_string()),
            ("enhance.energy_floor_ratio", e.energy_floor_ratio.to_string()),
            ("extract.max_area", x.max_area_at_1000ppi.to_string()),
            ("extract.circularity_min", x.circularity_min.to_string()),
            ("extract.ridge_context_min", x.ridge_context_min.to_string()),
            ("extract.confidence", x.confidence.to_string()),
            ("extract.morphology_radius", x.morphology_radius.to_string()),
            ("extract.window_fraction", x.window_fraction.to_string()),
            ("match.delta", m.delta_at_1000ppi.to_string()),
            ("match.shape_radial_bins", m.shape_context_bins.0.to_string()),
            ("match.shape_angular_bins", m.shape_context_bins.1.to_string()),
            ("match.fallback_iters", m.fallback_ransac_iters.to_string()),
            ("match.shape_candidates", m.shape_candidates.to_string()),
            ("match.seed", m.seed.to_string()),
            ("transform.iterations", t.iterations.to_string()),
            ("transform.inlier_tolerance", t.inlier_tolerance.to_string()),
            ("transform.seed", t.seed.to_string()),
            ("transform.min_scale", m.transform.scale_bounds.0.to_string()),
            ("transform.max_scale", m.transform.scale_bounds.1.to_string()),
            ("minutiae.neighbors", k.neighbors.to_string()),
            ("minutiae.angle_weight", k.angle_weight.to_string()),
            ("minutiae.missing_penalty", k.missing_penalty.to_string()),
            ("minutiae.tau", k.tau.to_string()),
            ("minutiae.rigid_tolerance", k.rigid_tolerance.to_string()),
            ("minutiae.max_distance", k.max_distance.to_string()),
            ("rerank.n", self.rerank_n.to_string()),
            ("rerank.w", self.rerank_w.to_string()),
            ("rerank.min_minutiae", self.gate.min_minutiae.to_string()),
            ("rerank.gap", self.gate.gap.to_string()),
            ("evaluate.confidences", list(&self.confidences)),
            ("evaluate.radius", self.radius_at_1000ppi.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        let e = &mut self.enhancement;
        let x = &mut self.extraction;
        let m = &mut self.matching;
        let k = &mut self.matcher;
        match key {
            "enhance.block_size" => e.block_size = parse(key, v)?,
            "enhance.overlap" => e.overlap = parse(key, v)?,
            "enhance.orientation_smoothing_passes" => e.orientation_smoothing_passes = parse(key, v)?,
            "enhance.bandpass_bandwidth" => e.bandpass_bandwidth = parse(key, v)?,
            "enhance.angular_bandwidth" => e.angular_bandwidth = parse(key, v)?,
            "enhance.pore_band_gain" => e.pore_band_gain = parse(key, v)?,
            "enhance.pore_band_cutoff" => e.pore_band_cutoff = parse(key, v)?,
            "enhance.impulse_threshold" => e.impulse_threshold = parse(key, v)?,
            "enhance.energy_floor_ratio" => e.energy_floor_ratio = parse(key, v)?,
            "extract.max_area" => x.max_area_at_1000ppi = parse(key, v)?,
            "extract.circularity_min" => x.circularity_min = parse(key, v)?,
            "extract.ridge_context_min" => x.ridge_context_min = parse(key, v)?,
            "extract.confidence" => x.confidence = parse(key, v)?,
            "extract.morphology_radius" => x.morphology_radius = parse(key, v)?,
            "extract.window_fraction" => x.window_fraction = parse(key, v)?,
            "match.delta" => m.delta_at_1000ppi = parse(key, v)?,
            "match.shape_radial_bins" => m.shape_context_bins.0 = parse(key, v)?,
            "match.shape_angular_bins" => m.shape_context_bins.1 = parse(key, v)?,
            "match.fallback_iters" => m.fallback_ransac_iters = parse(key, v)?,
            "match.shape_candidates" => m.shape_candidates = parse(key, v)?,
            "match.seed" => m.seed = parse(key, v)?,
            "transform.iterations" => m.transform.consensus.iterations = parse(key, v)?,
            "transform.inlier_tolerance" => m.transform.consensus.inlier_tolerance = parse(key, v)?,
            "transform.seed" => m.transform.consensus.seed = parse(key, v)?,
            "transform.min_scale" => m.transform.scale_bounds.0 = parse(key, v)?,
            "transform.max_scale" => m.transform.scale_bounds.1 = parse(key, v)?,
            "minutiae.neighbors" => k.neighbors = parse(key, v)?,
            "minutiae.angle_weight" => k.angle_weight = parse(key, v)?,
            "minutiae.missing_penalty" => k.missing_penalty = parse(key, v)?,
            "minutiae.tau" => k.tau = parse(key, v)?,
            "minutiae.rigid_tolerance" => k.rigid_tolerance = parse(key, v)?,
            "minutiae.max_distance" => k.max_distance = parse(key, v)?,
            "rerank.n" => self.rerank_n = parse(key, v)?,
            "rerank.w" => self.rerank_w = parse(key, v)?,
            "rerank.min_minutiae" => self.gate.min_minutiae = parse(key, v)?,
            "rerank.gap" => self.gate.gap = parse(key, v)?,
            "evaluate.confidences" => {
                self.confidences = v
                    .split(',')
                    .map(|c| parse(key, c))
                    .collect::<Result<Vec<f64>>>()?;
                if self.confidences.is_empty() {
                    bail!("evaluate.confidences needs at least one value");
                }
            }
            "evaluate.radius" => self.radius_at_1000ppi = parse(key, v)?,
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key=value, got {line:?}", i + 1))?;
            self.set(k.trim(), v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut c = Config::default();
        c.apply_text(&text).with_context(|| format!("in config {}", path.display()))?;
        Ok(c)
    }

    /// `# key=value` lines for report headers.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            writeln!(s, "# {k}={v}").unwrap();
        }
        s
    }

    pub fn rerank_params(&self) -> RerankParams {
        RerankParams {
            n: self.rerank_n,
            w: self.rerank_w,
            matcher: self.matcher.clone(),
            matching: self.matching.clone(),
        }
    }
}
