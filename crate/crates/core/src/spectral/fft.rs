use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Square two-dimensional complex FFT on row-major `n x n` data.
///
/// Index `p2 * n + p1` holds the sample at `(p1, p2)`; rows are runs of
/// constant `p2`. Neither direction is normalised.
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.forward, data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inverse, data);
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "FFT buffer has the wrong length");
        plan.process(data);
        let mut scratch = vec![Complex64::new(0.0, 0.0); n * n];
        transpose(data, &mut scratch, n);
        plan.process(&mut scratch);
        transpose(&scratch, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for bi in (0..n).step_by(BLOCK) {
        for bj in (0..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                for j in bj..(bj + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_recovers_input() {
        let n = 8;
        let fft = Fft2::new(n);
        let input: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = input.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&input) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_in_one_bin() {
        let n = 16;
        let fft = Fft2::new(n);
        let (j1, j2) = (3usize, 5usize);
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (p1, p2) = (idx % n, idx / n);
                let phase = 2.0 * std::f64::consts::PI * (j1 * p1 + j2 * p2) as f64 / n as f64;
                Complex64::from_polar(1.0, phase)
            })
            .collect();
        fft.forward(&mut data);
        for (idx, v) in data.iter().enumerate() {
            let expected = if idx == j2 * n + j1 { (n * n) as f64 } else { 0.0 };
            assert!((v.re - expected).abs() < 1e-9 && v.im.abs() < 1e-9);
        }
    }
}
