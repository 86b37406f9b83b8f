use std::f64::consts::{PI, TAU};

use crate::geometry::{wrap_angle, Point};
use crate::minutiae::MinutiaKind;

/// One low-frequency phase perturbation `amp * sin(kx x + ky y + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Wave {
    pub amp: f64,
    pub kx: f64,
    pub ky: f64,
    pub phase: f64,
}

impl Wave {
    fn value(&self, p: Point) -> f64 {
        self.amp * (self.kx * p.x + self.ky * p.y + self.phase).sin()
    }

    fn grad(&self, p: Point) -> (f64, f64) {
        let c = self.amp * (self.kx * p.x + self.ky * p.y + self.phase).cos();
        (c * self.kx, c * self.ky)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FieldMinutia {
    pub at: Point,
    /// +1 or -1 winding of the phase around the point.
    pub sign: f64,
    pub angle: f64,
    pub kind: MinutiaKind,
}

/// Ridge phase field. Ridge centrelines are the level set `phase = 0 (mod 2pi)`,
/// and each minutia is a unit phase vortex that adds or removes one ridge.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RidgeField {
    pub omega: f64,
    pub normal: (f64, f64),
    pub offset: f64,
    pub waves: Vec<Wave>,
    pub minutiae: Vec<FieldMinutia>,
    /// Field-space pore centres, all on centrelines.
    pub pores: Vec<Point>,
    /// `cos(phase)` above this is ridge.
    pub ridge_cut: f64,
}

/// Fraction of each period occupied by the dark ridge.
pub(crate) const RIDGE_FRACTION: f64 = 0.7;

impl RidgeField {
    pub fn new(period: f64, ridge_direction: f64, offset: f64, waves: Vec<Wave>) -> Self {
        let n = ridge_direction + PI / 2.0;
        RidgeField {
            omega: TAU / period,
            normal: (n.cos(), n.sin()),
            offset,
            waves,
            minutiae: Vec::new(),
            pores: Vec::new(),
            ridge_cut: (PI * RIDGE_FRACTION).cos(),
        }
    }

    pub fn smooth_phase(&self, p: Point) -> f64 {
        self.omega * (self.normal.0 * p.x + self.normal.1 * p.y)
            + self.offset
            + self.waves.iter().map(|w| w.value(p)).sum::<f64>()
    }

    pub fn smooth_grad(&self, p: Point) -> (f64, f64) {
        let mut g = (self.omega * self.normal.0, self.omega * self.normal.1);
        for w in &self.waves {
            let d = w.grad(p);
            g.0 += d.0;
            g.1 += d.1;
        }
        g
    }

    /// Phase and gradient, skipping vortex `skip` if given.
    pub fn phase_and_grad(&self, p: Point, skip: Option<usize>) -> (f64, (f64, f64)) {
        let mut phase = self.smooth_phase(p);
        let mut g = self.smooth_grad(p);
        for (i, m) in self.minutiae.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let (dx, dy) = (p.x - m.at.x, p.y - m.at.y);
            let r2 = (dx * dx + dy * dy).max(1e-12);
            phase += m.sign * dy.atan2(dx);
            g.0 += m.sign * -dy / r2;
            g.1 += m.sign * dx / r2;
        }
        (phase, g)
    }

    /// `cos(phase)` via a running complex product, avoiding one `atan2`
    /// per vortex.
    pub fn cos_phase(&self, p: Point) -> f64 {
        let s = self.smooth_phase(p);
        let (mut re, mut im) = (s.cos(), s.sin());
        for (k, m) in self.minutiae.iter().enumerate() {
            let dx = p.x - m.at.x;
            let dy = (p.y - m.at.y) * m.sign;
            let nre = re * dx - im * dy;
            im = re * dy + im * dx;
            re = nre;
            if k % 8 == 7 {
                let n = re.hypot(im);
                if n > 0.0 {
                    re /= n;
                    im /= n;
                }
            }
        }
        let n = re.hypot(im);
        if n > 0.0 {
            re / n
        } else {
            1.0
        }
    }

    /// Moves `p` onto the nearest ridge centreline with Newton steps.
    pub fn project_to_centerline(&self, mut p: Point) -> Option<Point> {
        for _ in 0..6 {
            let (phase, g) = self.phase_and_grad(p, None);
            let g2 = g.0 * g.0 + g.1 * g.1;
            if g2 < 1e-12 {
                return None;
            }
            let e = wrap_angle(phase);
            p = Point::new(p.x - e * g.0 / g2, p.y - e * g.1 / g2);
        }
        let (phase, g) = self.phase_and_grad(p, None);
        let gn = g.0.hypot(g.1);
        (wrap_angle(phase).abs() / gn < 0.05).then_some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> RidgeField {
        let mut f = RidgeField::new(
            18.0,
            0.3,
            0.7,
            vec![Wave { amp: 2.0, kx: 0.01, ky: 0.005, phase: 0.4 }],
        );
        for (x, y, s) in [(50.0, 60.0, 1.0), (120.0, 90.0, -1.0)] {
            f.minutiae.push(FieldMinutia {
                at: Point::new(x, y),
                sign: s,
                angle: 0.0,
                kind: MinutiaKind::Ending,
            });
        }
        f
    }

    #[test]
    fn fast_cosine_matches_direct_phase() {
        let f = field();
        for i in 0..200 {
            let p = Point::new((i * 37 % 200) as f64 + 0.3, (i * 53 % 170) as f64 + 0.6);
            let (phase, _) = f.phase_and_grad(p, None);
            assert!((f.cos_phase(p) - phase.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = field();
        let p = Point::new(80.0, 40.0);
        let (_, g) = f.phase_and_grad(p, None);
        let h = 1e-5;
        let px = f.phase_and_grad(Point::new(p.x + h, p.y), None).0;
        let mx = f.phase_and_grad(Point::new(p.x - h, p.y), None).0;
        let py = f.phase_and_grad(Point::new(p.x, p.y + h), None).0;
        let my = f.phase_and_grad(Point::new(p.x, p.y - h), None).0;
        assert!((g.0 - (px - mx) / (2.0 * h)).abs() < 1e-5);
        assert!((g.1 - (py - my) / (2.0 * h)).abs() < 1e-5);
    }

    #[test]
    fn projection_lands_on_ridge_centre() {
        let f = field();
        let q = f.project_to_centerline(Point::new(150.0, 20.0)).unwrap();
        assert!((f.cos_phase(q) - 1.0).abs() < 1e-6);
    }
}
