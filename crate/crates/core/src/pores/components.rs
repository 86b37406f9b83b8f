use crate::imaging::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Foreground,
    Background,
}

/// A maximal 8-connected set of same-polarity pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// `(x, y)` in breadth-first discovery order from the seed pixel.
    pub pixels: Vec<(usize, usize)>,
    /// Inclusive bounds `(min_x, min_y, max_x, max_y)`.
    pub bbox: (usize, usize, usize, usize),
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Labels components by breadth-first traversal, seeding in raster order,
/// so component order is deterministic.
pub fn connected_components(img: &BinaryImage, polarity: Polarity) -> Vec<Component> {
    let (w, h) = (img.width(), img.height());
    let want = polarity == Polarity::Foreground;
    let bits = img.bits();
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..w * h {
        if seen[start] || bits[start] != want {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            pixels.push((x, y));
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if !seen[j] && bits[j] == want {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push(Component {
            pixels,
            bbox: (x0, y0, x1, y1),
        });
    }
    out
}
