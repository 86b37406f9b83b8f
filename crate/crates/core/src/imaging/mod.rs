//! Raster containers and the low-level image operations every stage uses.

mod image;
mod integral;
mod morphology;
mod pgm;
mod resample;
mod threshold;

pub use image::{BinaryImage, GrayImage, MAX_PPI, MIN_PPI};
pub use integral::IntegralImage;
pub use morphology::{close, dilate, erode, morphology_open_close, open};
pub use pgm::{
    decode_pgm, encode_pgm, load_image, meta_path, read_meta_ppi, save_image, write_meta,
};
pub use resample::resample;
pub use threshold::{
    adaptive_threshold, window_side, CONFIDENCE_SCALE, DEFAULT_WINDOW_FRACTION,
};
