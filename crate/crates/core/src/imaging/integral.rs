use super::GrayImage;

/// Summed-area table with a zero first row and column.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<u64>,
}

impl IntegralImage {
    pub fn new(img: &GrayImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut table = vec![0u64; stride * (h + 1)];
        let px = img.pixels();
        for y in 0..h {
            let mut row = 0u64;
            for x in 0..w {
                row += px[y * w + x] as u64;
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        IntegralImage {
            width: w,
            height: h,
            table,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Entry `(x, y)`: sum over `[0, x) x [0, y)`.
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u64 {
        self.table[y * (self.width + 1) + x]
    }

    /// Sum over the half-open rectangle `[x0, x1) x [y0, y1)`.
    #[inline]
    pub fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u64 {
        debug_assert!(x0 <= x1 && y0 <= y1 && x1 <= self.width && y1 <= self.height);
        self.at(x1, y1) + self.at(x0, y0) - self.at(x0, y1) - self.at(x1, y0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_image_gives_zero_table() {
        let ii = IntegralImage::new(&GrayImage::filled(5, 3, 500, 0).unwrap());
        assert!((0..=5).all(|x| (0..=3).all(|y| ii.at(x, y) == 0)));
    }

    #[test]
    fn ones_full_rectangle() {
        let ii = IntegralImage::new(&GrayImage::filled(4, 4, 500, 1).unwrap());
        assert_eq!(ii.sum(0, 0, 4, 4), 16);
    }

    #[test]
    fn random_rectangles_match_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = GrayImage::from_fn(16, 16, 500, |_, _| rng.random()).unwrap();
        let ii = IntegralImage::new(&img);
        for _ in 0..100 {
            let (a, b) = (rng.random_range(0..=16), rng.random_range(0..=16));
            let (c, d) = (rng.random_range(0..=16), rng.random_range(0..=16));
            let (x0, x1) = (a.min(b), a.max(b));
            let (y0, y1) = (c.min(d), c.max(d));
            let mut naive = 0u64;
            for y in y0..y1 {
                for x in x0..x1 {
                    naive += img.get(x, y) as u64;
                }
            }
            assert_eq!(ii.sum(x0, y0, x1, y1), naive);
        }
    }
}
