//! Sweat-pore extraction and pore-assisted fingerprint identification.
//!
//! The pipeline runs from a grayscale print through ridge enhancement,
//! adaptive binarization and connected-component pore detection, to
//! transform-guided bipartite pore matching and rank-list fusion over a
//! gallery. A seeded synthetic generator supplies ground truth for the
//! evaluation harness.

pub mod assignment;
pub mod enhancement;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod identification;
pub mod imaging;
pub mod matching;
pub mod minutiae;
pub mod pores;
pub mod synthetic;

pub use assignment::{max_weight_matching, BipartiteGraph, Matching, WeightedEdge};
pub use enhancement::{EnhancementParams, Enhancer, NoEnhancement, StftEnhancer};
pub use error::{Error, Result};
pub use evaluation::{score_detections, DetectionReport, GroundTruthPores};
pub use geometry::{Point, SimilarityTransform};
pub use identification::{CmcCurve, Gallery, GalleryEntry, RankedCandidate};
pub use imaging::{BinaryImage, GrayImage};
pub use matching::{match_pores, MatchMode, MatchParams, PoreMatchResult};
pub use minutiae::{Minutia, MinutiaKind, MinutiaPair, MinutiaPairSet, MinutiaeTemplate};
pub use pores::{extract_pores, ExtractionParams, Pore, PoreTemplate};
pub use synthetic::{derive_latent, generate, LatentParams, SynthOutput, SynthParams};
