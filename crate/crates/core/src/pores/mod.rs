//! Level-3 pore features: extraction from images and the template format.

mod components;
mod extract;
mod filter;
mod format;

pub(crate) mod format_support {
    pub(crate) use super::format::{check_token, parse_header, parse_num};
}

pub use components::{connected_components, Component, Polarity};
pub use extract::{extract_pores, PoreExtractor};
pub use filter::{circularity, filter_pore_components, ridge_context_ratio};
pub use format::{parse_pore_template, read_pore_template, write_pore_template};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::imaging::DEFAULT_WINDOW_FRACTION;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pore {
    pub x: f64,
    pub y: f64,
    pub area: f64,
    pub circularity: f64,
    pub confidence: f64,
}

impl Pore {
    pub fn at(x: f64, y: f64) -> Self {
        Pore {
            x,
            y,
            area: 1.0,
            circularity: 1.0,
            confidence: 1.0,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoreTemplate {
    pub source_id: String,
    pub ppi: u32,
    pub pores: Vec<Pore>,
}

impl PoreTemplate {
    /// Builds a canonical template: pores sorted by `(y, x)` and any pore
    /// within 1 px of an already kept one dropped (the more confident of
    /// the two survives).
    pub fn new(source_id: impl Into<String>, ppi: u32, mut pores: Vec<Pore>) -> Self {
        pores.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
        let mut kept: Vec<Pore> = Vec::with_capacity(pores.len());
        for p in pores {
            // Sorted by y, so only the tail can be within 1 px.
            let dup = kept
                .iter()
                .rposition(|k| p.y - k.y < 1.0 && k.point().dist(p.point()) < 1.0);
            match dup {
                Some(i) if p.confidence > kept[i].confidence => kept[i] = p,
                Some(_) => {}
                None => kept.push(p),
            }
        }
        kept.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
        PoreTemplate {
            source_id: source_id.into(),
            ppi,
            pores: kept,
        }
    }

    pub fn len(&self) -> usize {
        self.pores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pores.is_empty()
    }

    pub fn points(&self) -> Vec<Point> {
        self.pores.iter().map(Pore::point).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionParams {
    /// Largest pore area at 1000 ppi; scales with the square of ppi.
    pub max_area_at_1000ppi: f64,
    pub circularity_min: f64,
    /// Minimum ridge fraction of the 2-px ring around a candidate.
    pub ridge_context_min: f64,
    /// Binarization confidence, percent.
    pub confidence: f64,
    pub morphology_radius: usize,
    pub window_fraction: f64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        ExtractionParams {
            max_area_at_1000ppi: 100.0,
            circularity_min: 0.5,
            ridge_context_min: 0.6,
            confidence: 50.0,
            morphology_radius: 1,
            window_fraction: DEFAULT_WINDOW_FRACTION,
        }
    }
}

impl ExtractionParams {
    pub fn max_area(&self, ppi: u32) -> f64 {
        let r = ppi as f64 / 1000.0;
        self.max_area_at_1000ppi * r * r
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_area_at_1000ppi > 0.0) {
            return Err(Error::domain("max pore area must be positive"));
        }
        if !(0.0..=1.0).contains(&self.circularity_min) {
            return Err(Error::domain("circularity_min outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.ridge_context_min) {
            return Err(Error::domain("ridge_context_min outside [0, 1]"));
        }
        if !(0.0..=100.0).contains(&self.confidence) {
            return Err(Error::domain("confidence outside [0, 100]"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::domain("window_fraction outside (0, 1]"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_area_scales_quadratically() {
        let p = ExtractionParams::default();
        assert_eq!(p.max_area(1000), 100.0);
        assert_eq!(p.max_area(500), 25.0);
    }

    #[test]
    fn template_is_sorted_and_deduplicated() {
        let mut weak = Pore::at(10.0, 5.0);
        weak.confidence = 0.2;
        let t = PoreTemplate::new(
            "t",
            1000,
            vec![Pore::at(3.0, 9.0), weak, Pore::at(10.4, 5.3), Pore::at(1.0, 5.0)],
        );
        let xy: Vec<_> = t.pores.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(xy, vec![(1.0, 5.0), (10.4, 5.3), (3.0, 9.0)]);
    }
}
