use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::minutiae::{read_minutiae_template, MinutiaeTemplate};
use crate::pores::{read_pore_template, PoreTemplate};

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub id: String,
    pub minutiae: MinutiaeTemplate,
    pub pores: PoreTemplate,
}

/// Reference prints sharing one resolution, with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    ppi: u32,
    entries: Vec<GalleryEntry>,
}

impl Gallery {
    pub fn new(ppi: u32, entries: Vec<GalleryEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::domain(format!("duplicate gallery id {:?}", e.id)));
            }
            for got in [e.minutiae.ppi, e.pores.ppi] {
                if got != ppi {
                    return Err(Error::PpiMismatch { left: ppi, right: got });
                }
            }
        }
        Ok(Gallery { ppi, entries })
    }

    pub fn ppi(&self) -> u32 {
        self.ppi
    }

    pub fn entries(&self) -> &[GalleryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&GalleryEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Loads `id minutiae_path pore_path` lines; relative paths resolve
    /// against the manifest's directory. The gallery takes the resolution
    /// of its first entry.
    pub fn load_manifest(path: &Path) -> Result<Gallery> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(i + 1, "expected `id minutiae_path pore_path`"));
            }
            entries.push(GalleryEntry {
                id: f[0].to_string(),
                minutiae: read_minutiae_template(&base.join(f[1]))?,
                pores: read_pore_template(&base.join(f[2]))?,
            });
        }
        let ppi = entries.first().map_or(1000, |e| e.minutiae.ppi);
        Gallery::new(ppi, entries)
    }
}

/// Parses `id score` lines from an external matcher.
pub fn parse_score_file(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::parse(i + 1, "expected `id score`"));
        }
        let score: f64 = f[1]
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("invalid score {:?}", f[1])))?;
        if !score.is_finite() {
            return Err(Error::parse(i + 1, "score must be finite"));
        }
        out.push((f[0].to_string(), score));
    }
    Ok(out)
}
