//! Seeded synthetic fingerprints with exact pore and minutia ground truth.
//!
//! Ridges come from a phase field: a plane wave bent by a few low-frequency
//! perturbations, plus one unit vortex per minutia. Pores are bright disks
//! on the ridge centrelines. Latent impressions are re-rendered from the
//! same field through a similarity transform, an optional smooth
//! deformation and a crop, so every correspondence is known exactly.

mod field;
mod warp;

pub use warp::{DeformTerm, Deformation};

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::evaluation::GroundTruthPores;
use crate::geometry::{Point, SimilarityTransform, ACCEPTED_SCALE};
use crate::imaging::{GrayImage, MAX_PPI, MIN_PPI};
use crate::minutiae::{Minutia, MinutiaKind, MinutiaPair, MinutiaPairSet, MinutiaeTemplate};
use field::{FieldMinutia, RidgeField, Wave};
use warp::Stage;

const RIDGE_LEVEL: f64 = 40.0;
const VALLEY_LEVEL: f64 = 215.0;
const PORE_LEVEL: f64 = 215.0;
/// Gaussian noise sigma per unit of `noise_level`.
const NOISE_SIGMA: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrientationField {
    /// Straight ridges running at `angle` radians.
    Constant { angle: f64 },
    /// Ridges that drift by up to about 20 degrees over a few hundred pixels.
    SmoothRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Region { x, y, width, height }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub ppi: u32,
    /// Ridge-to-ridge spacing in pixels.
    pub ridge_period: f64,
    pub orientation_field: OrientationField,
    /// Minutiae per million pixels.
    pub minutiae_density: f64,
    /// Pores per 100 pixels of ridge centreline.
    pub pore_rate: f64,
    pub pore_radius: f64,
    /// In `[0, 1]`; scales additive Gaussian noise.
    pub noise_level: f64,
    pub crop: Option<Region>,
    /// Upper bound on the smooth displacement, in pixels.
    pub deformation_amplitude: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 1,
            width: 512,
            height: 512,
            ppi: 1000,
            ridge_period: 22.0,
            orientation_field: OrientationField::SmoothRandom,
            minutiae_density: 150.0,
            pore_rate: 2.5,
            pore_radius: 2.5,
            noise_level: 0.0,
            crop: None,
            deformation_amplitude: 0.0,
        }
    }
}

impl SynthParams {
    /// Defaults with lengths scaled from 1000 ppi to `ppi`.
    pub fn at_ppi(ppi: u32) -> Self {
        let f = ppi as f64 / 1000.0;
        let d = SynthParams::default();
        SynthParams {
            ppi,
            width: (d.width as f64 * f).round() as usize,
            height: (d.height as f64 * f).round() as usize,
            ridge_period: d.ridge_period * f,
            pore_radius: d.pore_radius * f,
            minutiae_density: d.minutiae_density / (f * f),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::domain("image dimensions must be positive"));
        }
        if !(MIN_PPI..=MAX_PPI).contains(&self.ppi) {
            return Err(Error::domain(format!("ppi {} out of range", self.ppi)));
        }
        if !(self.ridge_period >= 3.0) {
            return Err(Error::domain("ridge period must be at least 3 px"));
        }
        if (self.width.min(self.height) as f64) < self.ridge_period {
            return Err(Error::domain("image is smaller than one ridge period"));
        }
        if !(0.0..=1.0).contains(&self.noise_level) {
            return Err(Error::domain("noise level must lie in [0, 1]"));
        }
        if !(self.pore_radius > 0.0) || !(self.pore_rate >= 0.0) || !(self.minutiae_density >= 0.0) {
            return Err(Error::domain("pore radius must be positive; rates non-negative"));
        }
        if !(self.deformation_amplitude >= 0.0) {
            return Err(Error::domain("deformation amplitude must be non-negative"));
        }
        if let Some(c) = self.crop {
            if c.width == 0 || c.height == 0 || c.x + c.width > self.width || c.y + c.height > self.height {
                return Err(Error::domain("crop region must lie inside the image"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub image: GrayImage,
    pub truth_pores: GroundTruthPores,
    pub truth_minutiae: MinutiaeTemplate,
    /// Similarity applied on top of the parent (identity for a fresh print).
    pub applied_transform: SimilarityTransform,
    /// Deformation introduced at this step.
    pub deformation: Deformation,
    /// Crop window in the transformed frame.
    pub crop: Region,
    /// Generator-wide id of each truth pore; equal ids are the same pore.
    pub pore_ids: Vec<usize>,
    /// Generator-wide id of each truth minutia.
    pub minutia_ids: Vec<usize>,
    field: Arc<RidgeField>,
    stages: Vec<Stage>,
    bounds: (usize, usize),
    pore_radius: f64,
    ridge_period: f64,
}

impl SynthOutput {
    /// `(self index, parent index)` for every pore present in both.
    pub fn pore_correspondence(&self, parent: &SynthOutput) -> Vec<(usize, usize)> {
        correspond(&self.pore_ids, &parent.pore_ids)
    }

    pub fn minutia_correspondence(&self, parent: &SynthOutput) -> Vec<(usize, usize)> {
        correspond(&self.minutia_ids, &parent.minutia_ids)
    }

    /// True minutia pairs with this output on the latent side.
    pub fn true_minutia_pairs(&self, parent: &SynthOutput) -> MinutiaPairSet {
        MinutiaPairSet::new(
            self.minutia_correspondence(parent)
                .into_iter()
                .map(|(l, r)| MinutiaPair {
                    latent: l,
                    rolled: r,
                    score: 1.0,
                })
                .collect(),
        )
    }

    /// Maps a point given in this output's pixel frame back to field
    /// coordinates and returns the distance to the nearest ridge centreline.
    pub fn centerline_distance(&self, q: Point) -> f64 {
        let p = warp::inverse(&self.stages, &similarity_inverses(&self.stages), q);
        let (phase, g) = self.field.phase_and_grad(p, None);
        let units = warp::field_units_per_pixel(&self.stages);
        crate::geometry::wrap_angle(phase).abs() / g.0.hypot(g.1) / units
    }

    pub fn ridge_period(&self) -> f64 {
        self.ridge_period
    }
}

fn correspond(child: &[usize], parent: &[usize]) -> Vec<(usize, usize)> {
    let index: std::collections::HashMap<usize, usize> =
        parent.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    child
        .iter()
        .enumerate()
        .filter_map(|(i, id)| index.get(id).map(|&j| (i, j)))
        .collect()
}

fn similarity_inverses(stages: &[Stage]) -> Vec<Option<SimilarityTransform>> {
    stages
        .iter()
        .map(|s| match s {
            Stage::Similarity(t) => Some(t.inverse()),
            _ => None,
        })
        .collect()
}

/// Dart-throwing sampler with a minimum spacing, backed by a hash grid.
struct Spacer {
    cell: f64,
    min: f64,
    cells: std::collections::HashMap<(i64, i64), Vec<Point>>,
}

impl Spacer {
    fn new(min: f64) -> Self {
        Spacer {
            cell: min.max(1e-6),
            min,
            cells: Default::default(),
        }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    fn fits(&self, p: Point) -> bool {
        let (cx, cy) = self.key(p);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    if v.iter().any(|q| q.dist(p) < self.min) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: Point) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(p);
    }
}

fn build_field(params: &SynthParams, rng: &mut ChaCha8Rng) -> RidgeField {
    let t = params.ridge_period;
    let omega = TAU / t;
    let (direction, waves) = match params.orientation_field {
        OrientationField::Constant { angle } => (angle, Vec::new()),
        OrientationField::SmoothRandom => {
            let waves = (0..3)
                .map(|_| {
                    let k = TAU / (rng.random_range(15.0..30.0) * t);
                    let dir: f64 = rng.random_range(0.0..TAU);
                    Wave {
                        amp: 0.12 * omega / k,
                        kx: k * dir.cos(),
                        ky: k * dir.sin(),
                        phase: rng.random_range(0.0..TAU),
                    }
                })
                .collect();
            (rng.random_range(0.0..PI), waves)
        }
    };
    let mut field = RidgeField::new(t, direction, rng.random_range(0.0..TAU), waves);

    let (w, h) = (params.width as f64, params.height as f64);
    let margin = t;
    let target = (params.minutiae_density * w * h / 1e6).round() as usize;
    let mut spacer = Spacer::new(2.5 * t);
    let mut centres = Vec::new();
    if w > 2.0 * margin && h > 2.0 * margin {
        for _ in 0..target * 200 {
            if centres.len() == target {
                break;
            }
            let p = Point::new(rng.random_range(margin..w - margin), rng.random_range(margin..h - margin));
            if spacer.fits(p) {
                spacer.insert(p);
                centres.push(p);
            }
        }
    }
    // Balanced winding keeps the far field close to the plain wave.
    let mut signs: Vec<f64> = (0..centres.len()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    for i in (1..signs.len()).rev() {
        signs.swap(i, rng.random_range(0..=i));
    }
    field.minutiae = centres
        .into_iter()
        .zip(signs)
        .map(|(at, sign)| FieldMinutia {
            at,
            sign,
            angle: 0.0,
            kind: MinutiaKind::Unknown,
        })
        .collect();
    for i in 0..field.minutiae.len() {
        let at = field.minutiae[i].at;
        let (phase, g) = field.phase_and_grad(at, Some(i));
        let flow = g.1.atan2(g.0) + PI / 2.0;
        let m = &mut field.minutiae[i];
        m.angle = (flow + if m.sign > 0.0 { 0.0 } else { PI }).rem_euclid(TAU);
        m.kind = if phase.cos() > field.ridge_cut {
            MinutiaKind::Bifurcation
        } else {
            MinutiaKind::Ending
        };
    }

    let pore_margin = params.pore_radius + 3.0;
    let target = (params.pore_rate / 100.0 * (w - 2.0 * pore_margin).max(0.0) * (h - 2.0 * pore_margin).max(0.0) / t)
        .round() as usize;
    let mut spacer = Spacer::new(t * 2.0 / 3.0);
    let keep_out = t;
    let mut pores = Vec::new();
    if w > 2.0 * pore_margin && h > 2.0 * pore_margin {
        for _ in 0..target * 50 {
            if pores.len() == target {
                break;
            }
            let guess = Point::new(
                rng.random_range(pore_margin..w - pore_margin),
                rng.random_range(pore_margin..h - pore_margin),
            );
            let Some(p) = field.project_to_centerline(guess) else { continue };
            if p.x < pore_margin || p.y < pore_margin || p.x > w - pore_margin || p.y > h - pore_margin {
                continue;
            }
            if field.minutiae.iter().any(|m| m.at.dist(p) < keep_out) || !spacer.fits(p) {
                continue;
            }
            spacer.insert(p);
            pores.push(p);
        }
    }
    pores.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    field.pores = pores;
    field
}

fn render(
    field: &RidgeField,
    stages: &[Stage],
    width: usize,
    height: usize,
    ppi: u32,
    pore_radius: f64,
    noise_level: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GrayImage> {
    let inv = similarity_inverses(stages);
    let units = warp::field_units_per_pixel(stages);
    let softness = 0.25 * field.omega;
    let reach = pore_radius + units;
    let mut grid = Spacer::new(2.0 * reach);
    for &p in &field.pores {
        grid.insert(p);
    }
    let mut pixels = vec![0u8; width * height];
    let noise = Normal::new(0.0, NOISE_SIGMA * noise_level.max(0.0)).expect("finite sigma");
    for y in 0..height {
        for x in 0..width {
            let p = warp::inverse(stages, &inv, Point::new(x as f64, y as f64));
            let c = field.cos_phase(p);
            let ridge = 1.0 / (1.0 + (-(c - field.ridge_cut) / softness).exp());
            let mut v = VALLEY_LEVEL + (RIDGE_LEVEL - VALLEY_LEVEL) * ridge;
            let (cx, cy) = grid.key(p);
            let mut cover: f64 = 0.0;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(list) = grid.cells.get(&(cx + dx, cy + dy)) {
                        for q in list {
                            let d = q.dist(p);
                            cover = cover.max(((pore_radius - d) / units + 0.5).clamp(0.0, 1.0));
                        }
                    }
                }
            }
            v += (PORE_LEVEL - v) * cover;
            if noise_level > 0.0 {
                v += noise.sample(rng);
            }
            pixels[y * width + x] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage::new(width, height, ppi, pixels)
}

/// Maps field pores and minutiae into an output frame, keeping those that
/// land inside it.
fn project_truth(
    field: &RidgeField,
    stages: &[Stage],
    width: usize,
    height: usize,
    ppi: u32,
    id: &str,
) -> (GroundTruthPores, Vec<usize>, MinutiaeTemplate, Vec<usize>) {
    let inside = |q: Point| q.x >= 0.0 && q.y >= 0.0 && q.x <= (width - 1) as f64 && q.y <= (height - 1) as f64;
    let mut pts = Vec::new();
    let mut pore_ids = Vec::new();
    for (i, &p) in field.pores.iter().enumerate() {
        let q = warp::forward(stages, p);
        if inside(q) {
            pts.push(q);
            pore_ids.push(i);
        }
    }
    let mut minutiae = Vec::new();
    let mut minutia_ids = Vec::new();
    for (i, m) in field.minutiae.iter().enumerate() {
        let q = warp::forward(stages, m.at);
        if !inside(q) {
            continue;
        }
        let ahead = warp::forward(stages, Point::new(m.at.x + 3.0 * m.angle.cos(), m.at.y + 3.0 * m.angle.sin()));
        let mut out = Minutia::new(q.x, q.y, (ahead.y - q.y).atan2(ahead.x - q.x));
        out.kind = m.kind;
        minutiae.push(out);
        minutia_ids.push(i);
    }
    (
        GroundTruthPores::new(id, ppi, pts),
        pore_ids,
        MinutiaeTemplate::new(id, ppi, minutiae),
        minutia_ids,
    )
}

/// Generates a print from `params`. Identical params give identical output.
pub fn generate(params: &SynthParams) -> Result<SynthOutput> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let field = Arc::new(build_field(params, &mut rng));
    let deformation = Deformation::random(params.deformation_amplitude, &mut rng);
    let crop = params.crop.unwrap_or(Region::new(0, 0, params.width, params.height));
    let mut stages = Vec::new();
    if !deformation.is_identity() {
        stages.push(Stage::Deform(deformation.clone()));
    }
    if crop.x != 0 || crop.y != 0 {
        stages.push(Stage::Offset(crop.x as f64, crop.y as f64));
    }
    let id = format!("synth{}", params.seed);
    let image = render(
        &field,
        &stages,
        crop.width,
        crop.height,
        params.ppi,
        params.pore_radius,
        params.noise_level,
        &mut rng,
    )?;
    let (truth_pores, pore_ids, truth_minutiae, minutia_ids) =
        project_truth(&field, &stages, crop.width, crop.height, params.ppi, &id);
    Ok(SynthOutput {
        image,
        truth_pores,
        truth_minutiae,
        applied_transform: SimilarityTransform::identity(),
        deformation,
        crop,
        pore_ids,
        minutia_ids,
        field,
        stages,
        bounds: (crop.width, crop.height),
        pore_radius: params.pore_radius,
        ridge_period: params.ridge_period,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentParams {
    /// Parent pixel frame to latent frame, applied before the crop.
    pub transform: SimilarityTransform,
    pub crop: Region,
    pub noise_level: f64,
    pub deformation_amplitude: f64,
    pub seed: u64,
}

impl LatentParams {
    pub fn new(transform: SimilarityTransform, crop: Region) -> Self {
        LatentParams {
            transform,
            crop,
            noise_level: 0.0,
            deformation_amplitude: 0.0,
            seed: 0,
        }
    }
}

/// Re-renders the parent's field as a latent impression.
///
/// The deformation acts in the parent frame, then the similarity, then the
/// crop. The crop must map back inside the parent image.
pub fn derive_latent(parent: &SynthOutput, lp: &LatentParams) -> Result<SynthOutput> {
    let t = lp.transform;
    if !(ACCEPTED_SCALE.0..=ACCEPTED_SCALE.1).contains(&t.scale) {
        return Err(Error::domain(format!("latent scale {} outside [0.5, 2]", t.scale)));
    }
    if !(0.0..=1.0).contains(&lp.noise_level) || !(lp.deformation_amplitude >= 0.0) {
        return Err(Error::domain("noise level must lie in [0, 1]; amplitude non-negative"));
    }
    let c = lp.crop;
    if c.width == 0 || c.height == 0 {
        return Err(Error::domain("crop must be non-empty"));
    }
    let back = t.inverse();
    let (pw, ph) = parent.bounds;
    let eps = 1e-6;
    for (x, y) in [(0, 0), (c.width - 1, 0), (0, c.height - 1), (c.width - 1, c.height - 1)] {
        let p = back.apply(Point::new((c.x + x) as f64, (c.y + y) as f64));
        if p.x < -eps || p.y < -eps || p.x > (pw - 1) as f64 + eps || p.y > (ph - 1) as f64 + eps {
            return Err(Error::domain("crop falls outside the parent image"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(lp.seed);
    let deformation = Deformation::random(lp.deformation_amplitude, &mut rng);
    let mut stages = parent.stages.clone();
    if !deformation.is_identity() {
        stages.push(Stage::Deform(deformation.clone()));
    }
    if t != SimilarityTransform::identity() {
        stages.push(Stage::Similarity(t));
    }
    if c.x != 0 || c.y != 0 {
        stages.push(Stage::Offset(c.x as f64, c.y as f64));
    }
    let ppi = parent.image.ppi();
    let id = format!("latent{}", lp.seed);
    let image = render(
        &parent.field,
        &stages,
        c.width,
        c.height,
        ppi,
        parent.pore_radius,
        lp.noise_level,
        &mut rng,
    )?;
    let (truth_pores, pore_ids, truth_minutiae, minutia_ids) =
        project_truth(&parent.field, &stages, c.width, c.height, ppi, &id);
    Ok(SynthOutput {
        image,
        truth_pores,
        truth_minutiae,
        applied_transform: t,
        deformation,
        crop: c,
        pore_ids,
        minutia_ids,
        field: parent.field.clone(),
        stages,
        bounds: (c.width, c.height),
        pore_radius: parent.pore_radius,
        ridge_period: parent.ridge_period * t.scale,
    })
}
