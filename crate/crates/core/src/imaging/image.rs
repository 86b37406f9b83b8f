use crate::error::{Error, Result};

pub const MIN_PPI: u32 = 250;
pub const MAX_PPI: u32 = 4000;

fn check_dims(width: usize, height: usize, len: usize, ppi: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::domain(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if len != width * height {
        return Err(Error::domain(format!(
            "buffer of {len} values does not match {width}x{height}"
        )));
    }
    if !(MIN_PPI..=MAX_PPI).contains(&ppi) {
        return Err(Error::domain(format!(
            "ppi {ppi} outside [{MIN_PPI}, {MAX_PPI}]"
        )));
    }
    Ok(())
}

/// 8-bit grayscale raster, row-major, 0 = black.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    ppi: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, ppi: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len(), ppi)?;
        Ok(GrayImage {
            width,
            height,
            ppi,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, ppi: u32, value: u8) -> Result<Self> {
        Self::new(width, height, ppi, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        ppi: u32,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, ppi, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ppi(&self) -> u32 {
        self.ppi
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn with_ppi(mut self, ppi: u32) -> Result<Self> {
        check_dims(self.width, self.height, self.pixels.len(), ppi)?;
        self.ppi = ppi;
        Ok(self)
    }

    pub fn inverted(&self) -> GrayImage {
        GrayImage {
            pixels: self.pixels.iter().map(|&p| 255 - p).collect(),
            ..self.clone()
        }
    }
}

/// Foreground mask; foreground means ridge (dark ink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    ppi: u32,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, ppi: u32, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len(), ppi)?;
        Ok(BinaryImage {
            width,
            height,
            ppi,
            bits,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        ppi: u32,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, ppi, bits)
    }

    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        ppi: u32,
        bits: Vec<bool>,
    ) -> Self {
        debug_assert_eq!(bits.len(), width * height);
        BinaryImage {
            width,
            height,
            ppi,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ppi(&self) -> u32 {
        self.ppi
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Renders foreground as black (0) and background as white (255).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            ppi: self.ppi,
            pixels: self.bits.iter().map(|&b| if b { 0 } else { 255 }).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(GrayImage::new(0, 3, 500, vec![]).is_err());
        assert!(GrayImage::new(2, 2, 500, vec![0; 3]).is_err());
        assert!(GrayImage::new(2, 2, 100, vec![0; 4]).is_err());
        assert!(GrayImage::new(2, 2, 5000, vec![0; 4]).is_err());
        assert!(GrayImage::new(2, 2, 1000, vec![0; 4]).is_ok());
    }
}
