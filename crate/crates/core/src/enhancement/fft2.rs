use std::sync::Arc;

use rustfft::num_complex::Complex32;
use rustfft::{Fft, FftPlanner};

/// Square 2-D FFT built from row and column passes.
pub(crate) struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f32>>,
    inv: Arc<dyn Fft<f32>>,
    column: Vec<Complex32>,
    scratch: Vec<Complex32>,
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Fft2 {
            n,
            fwd,
            inv,
            column: vec![Complex32::default(); n * n],
            scratch: vec![Complex32::default(); scratch_len],
        }
    }

    fn run(&mut self, data: &mut [Complex32], forward: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let plan = if forward { &self.fwd } else { &self.inv };
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.column, n);
        plan.process_with_scratch(&mut self.column, &mut self.scratch);
        transpose(&self.column, data, n);
    }

    pub(crate) fn forward(&mut self, data: &mut [Complex32]) {
        self.run(data, true);
    }

    /// Unnormalized inverse; divide by `n * n` to invert `forward`.
    pub(crate) fn inverse(&mut self, data: &mut [Complex32]) {
        self.run(data, false);
    }
}

fn transpose(src: &[Complex32], dst: &mut [Complex32], n: usize) {
    for y in 0..n {
        for x in 0..n {
            dst[x * n + y] = src[y * n + x];
        }
    }
}
