//! Ridge enhancement: maps latent, rolled and scanned inputs into one
//! ridge-sharp appearance before binarization.

mod fft2;
mod impulse;
mod stft;

pub use impulse::suppress_impulses;
pub use stft::{analyze_blocks, stft_enhance, BlockGrid, StftEnhancer};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Ridge periods outside 3..=25 px are not fingerprint ridges.
pub const RIDGE_FREQ_MIN: f64 = 1.0 / 25.0;
pub const RIDGE_FREQ_MAX: f64 = 1.0 / 3.0;

/// A pluggable enhancement stage.
pub trait Enhancer: Send + Sync {
    fn enhance(&self, img: &GrayImage) -> Result<GrayImage>;
}

/// Passes the image through untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoEnhancement;

impl Enhancer for NoEnhancement {
    fn enhance(&self, img: &GrayImage) -> Result<GrayImage> {
        Ok(img.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpectrum {
    /// Top-left corner of the block.
    pub x: usize,
    pub y: usize,
    /// Ridge flow direction, radians in `[0, pi)`.
    pub orientation: f64,
    /// Cycles per pixel.
    pub frequency: f64,
    /// Peak spectral magnitude inside the ridge annulus.
    pub energy: f64,
    pub is_ridge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementParams {
    pub block_size: usize,
    pub overlap: usize,
    pub orientation_smoothing_passes: usize,
    /// Radial standard deviation of the ridge passband, octaves.
    pub bandpass_bandwidth: f64,
    /// Angular standard deviation of the ridge passband, radians.
    pub angular_bandwidth: f64,
    /// Gain of the isotropic band above the ridge frequency that keeps
    /// pore-sized blobs alive; 0 disables it.
    pub pore_band_gain: f64,
    /// Upper edge of the pore band, cycles per pixel.
    pub pore_band_cutoff: f64,
    /// Pixels that are the extreme of their 3x3 window and further than
    /// this from its median are treated as impulse noise; 0 disables.
    pub impulse_threshold: u8,
    /// Blocks whose peak energy is below this fraction of the median
    /// block energy are treated as background.
    pub energy_floor_ratio: f64,
}

impl Default for EnhancementParams {
    fn default() -> Self {
        EnhancementParams {
            block_size: 32,
            overlap: 16,
            orientation_smoothing_passes: 2,
            bandpass_bandwidth: 0.5,
            angular_bandwidth: 0.35,
            pore_band_gain: 1.0,
            pore_band_cutoff: 0.3,
            impulse_threshold: 64,
            energy_floor_ratio: 0.1,
        }
    }
}

impl EnhancementParams {
    pub fn validate(&self) -> Result<()> {
        if !self.block_size.is_power_of_two() || self.block_size < 8 {
            return Err(Error::domain(format!(
                "block_size {} must be a power of two >= 8",
                self.block_size
            )));
        }
        if self.overlap == 0 || self.overlap >= self.block_size {
            return Err(Error::domain(format!(
                "overlap {} must lie in (0, block_size)",
                self.overlap
            )));
        }
        if !(self.bandpass_bandwidth > 0.0) || !(self.angular_bandwidth > 0.0) {
            return Err(Error::domain("bandwidths must be positive"));
        }
        if !(self.pore_band_gain >= 0.0) || !(self.pore_band_cutoff > 0.0) {
            return Err(Error::domain("pore band settings must be non-negative"));
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.block_size - self.overlap
    }
}
