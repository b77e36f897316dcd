//! Random divergence-free fields with a prescribed spectral envelope.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{leray_project, SpectralField, WaveGrid};

/// Envelope `|j|^{-decay}` on the modes `|j| <= max_index`.
#[derive(Debug, Clone, Copy)]
pub struct Spectrum {
    pub decay: f64,
    pub max_index: f64,
}

impl Spectrum {
    pub fn new(decay: f64, max_index: f64) -> Self {
        Self { decay, max_index }
    }
}

/// Draws a real, divergence-free, zero-mean field with Gaussian
/// coefficients shaped by `spectrum`.
pub fn random_field<R: Rng + ?Sized>(grid: &Arc<WaveGrid>, spectrum: Spectrum, rng: &mut R) -> SpectralField {
    let n = grid.len();
    let mut raw = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    for &idx in grid.retained() {
        let j = grid.index_of(idx);
        let jn = ((j[0] * j[0] + j[1] * j[1]) as f64).sqrt();
        if jn > spectrum.max_index {
            continue;
        }
        let amp = jn.powf(-spectrum.decay);
        for comp in raw.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            comp[idx] = Complex64::new(re, im) * amp;
        }
    }
    symmetrize(grid, &mut raw);
    leray_project(grid, raw)
}

/// Replaces `c_k` by `(c_k + conj c_{-k}) / 2` so the field is real.
pub fn symmetrize(grid: &WaveGrid, raw: &mut [Vec<Complex64>; 2]) {
    for comp in raw.iter_mut() {
        let snapshot = comp.clone();
        for idx in 0..grid.len() {
            comp[idx] = (snapshot[idx] + snapshot[grid.conjugate_index(idx)].conj()) * 0.5;
        }
    }
}

/// Rescales `field` to the requested `H` norm (no-op on the zero field).
pub fn with_h_norm(mut field: SpectralField, target: f64) -> SpectralField {
    let current = field.inner(&field).sqrt();
    if current > 0.0 {
        field.scale(target / current);
    }
    field
}
