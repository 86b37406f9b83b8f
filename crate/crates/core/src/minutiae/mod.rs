//! Level-2 features: minutiae templates, a plumbing-grade correspondence
//! finder, and latent-to-rolled transform estimation.

mod format;
mod matcher;
mod transform;

pub use format::{
    parse_minutiae_template, parse_pairs, read_minutiae_template, read_pairs,
    write_minutiae_template, write_pairs,
};
pub use matcher::{match_minutiae, MatcherParams};
pub use transform::{estimate_transform, TransformParams};

use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinutiaKind {
    Ending,
    Bifurcation,
    Unknown,
}

impl MinutiaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MinutiaKind::Ending => "ending",
            MinutiaKind::Bifurcation => "bifurcation",
            MinutiaKind::Unknown => "unknown",
        }
    }
}

impl std::str::FromStr for MinutiaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ending" => Ok(MinutiaKind::Ending),
            "bifurcation" => Ok(MinutiaKind::Bifurcation),
            "unknown" => Ok(MinutiaKind::Unknown),
            other => Err(format!("unknown minutia kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minutia {
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2pi)`.
    pub angle: f64,
    pub kind: MinutiaKind,
    pub quality: f64,
}

impl Minutia {
    pub fn new(x: f64, y: f64, angle: f64) -> Self {
        Minutia {
            x,
            y,
            angle: angle.rem_euclid(std::f64::consts::TAU),
            kind: MinutiaKind::Unknown,
            quality: 1.0,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinutiaeTemplate {
    pub source_id: String,
    pub ppi: u32,
    pub minutiae: Vec<Minutia>,
}

impl MinutiaeTemplate {
    pub fn new(source_id: impl Into<String>, ppi: u32, minutiae: Vec<Minutia>) -> Self {
        MinutiaeTemplate {
            source_id: source_id.into(),
            ppi,
            minutiae,
        }
    }

    pub fn len(&self) -> usize {
        self.minutiae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutiae.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinutiaPair {
    pub latent: usize,
    pub rolled: usize,
    /// In `[0, 1]`.
    pub score: f64,
}

/// One-to-one minutia correspondences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinutiaPairSet {
    pub pairs: Vec<MinutiaPair>,
    pub total_score: f64,
}

impl MinutiaPairSet {
    /// Drops any pair reusing an index already taken by an earlier pair.
    pub fn new(pairs: Vec<MinutiaPair>) -> Self {
        let mut seen_l = std::collections::HashSet::new();
        let mut seen_r = std::collections::HashSet::new();
        let pairs: Vec<MinutiaPair> = pairs
            .into_iter()
            .filter(|p| seen_l.insert(p.latent) & seen_r.insert(p.rolled))
            .collect();
        let total_score = pairs.iter().map(|p| p.score).sum();
        MinutiaPairSet { pairs, total_score }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}
