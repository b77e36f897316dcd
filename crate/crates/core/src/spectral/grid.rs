use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::fft::Fft2;
use crate::{Error, Result};

/// Default fraction of the Nyquist radius kept by the Galerkin truncation.
pub const TWO_THIRDS: f64 = 2.0 / 3.0;

/// Grid parameters that identify a [`WaveGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Side length of the periodic box.
    pub length: f64,
    /// Collocation points (and Fourier modes) per dimension.
    pub modes: usize,
    /// Retained-mode radius as a fraction of `modes / 2`.
    pub dealias_fraction: f64,
}

/// Periodic box `[0, L)^2` sampled on an `M x M` grid with a circular
/// Galerkin truncation `|j| < dealias_fraction * M / 2`.
///
/// Coefficient and sample arrays are row-major with index `i2 * M + i1`;
/// FFT index `i` maps to the signed integer wavenumber `i` or `i - M`.
#[derive(Debug)]
pub struct WaveGrid {
    spec: GridSpec,
    fft: Fft2,
    padded: OnceLock<Fft2>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    ksq: Vec<f64>,
    retained: Vec<bool>,
    retained_list: Vec<usize>,
}

impl WaveGrid {
    /// Builds a grid. `modes` must be an even power of two.
    pub fn new(length: f64, modes: usize, dealias_fraction: f64) -> Result<Arc<Self>> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("side length {length} must be positive")));
        }
        if modes < 4 || !modes.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{modes} modes per side; a power of two >= 4 is required"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction {dealias_fraction} must lie in (0, 1]"
            )));
        }
        let n = modes;
        let base = 2.0 * PI / length;
        let radius = dealias_fraction * n as f64 / 2.0;
        let mut k1 = vec![0.0; n * n];
        let mut k2 = vec![0.0; n * n];
        let mut ksq = vec![0.0; n * n];
        let mut retained = vec![false; n * n];
        let mut retained_list = Vec::new();
        for i2 in 0..n {
            for i1 in 0..n {
                let idx = i2 * n + i1;
                let (j1, j2) = (signed(i1, n), signed(i2, n));
                k1[idx] = base * j1 as f64;
                k2[idx] = base * j2 as f64;
                ksq[idx] = k1[idx] * k1[idx] + k2[idx] * k2[idx];
                let jsq = (j1 * j1 + j2 * j2) as f64;
                if jsq > 0.0 && jsq < radius * radius {
                    retained[idx] = true;
                    retained_list.push(idx);
                }
            }
        }
        Ok(Arc::new(Self {
            spec: GridSpec { length, modes, dealias_fraction },
            fft: Fft2::new(n),
            padded: OnceLock::new(),
            k1,
            k2,
            ksq,
            retained,
            retained_list,
        }))
    }

    /// Grid with the default two-thirds truncation.
    pub fn with_default_dealiasing(length: f64, modes: usize) -> Result<Arc<Self>> {
        Self::new(length, modes, TWO_THIRDS)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn length(&self) -> f64 {
        self.spec.length
    }

    pub fn modes(&self) -> usize {
        self.spec.modes
    }

    pub fn len(&self) -> usize {
        self.spec.modes * self.spec.modes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest Stokes eigenvalue `(2 pi / L)^2`.
    pub fn lambda1(&self) -> f64 {
        let base = 2.0 * PI / self.spec.length;
        base * base
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 2] {
        [self.k1[idx], self.k2[idx]]
    }

    /// Integer multi-index `j` with `k = (2 pi / L) j`.
    pub fn index_of(&self, idx: usize) -> [i64; 2] {
        let n = self.spec.modes;
        [signed(idx % n, n), signed(idx / n, n)]
    }

    /// Flat index of the integer wavenumber `j`, wrapped periodically.
    pub fn flat_index(&self, j: [i64; 2]) -> usize {
        let n = self.spec.modes as i64;
        (j[1].rem_euclid(n) * n + j[0].rem_euclid(n)) as usize
    }

    /// Flat index of `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.spec.modes;
        let (i1, i2) = (idx % n, idx / n);
        ((n - i2) % n) * n + (n - i1) % n
    }

    /// `|k|^2`, the Stokes eigenvalue of the mode.
    pub fn ksq(&self, idx: usize) -> f64 {
        self.ksq[idx]
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        self.retained[idx]
    }

    /// Flat indices of every retained (nonzero) mode.
    pub fn retained(&self) -> &[usize] {
        &self.retained_list
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    /// FFT on the `2M x 2M` grid used for exact quadrature of quartic terms.
    pub fn padded_fft(&self) -> &Fft2 {
        self.padded.get_or_init(|| Fft2::new(2 * self.spec.modes))
    }

    /// Physical coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let n = self.spec.modes;
        let dx = self.spec.length / n as f64;
        [(idx % n) as f64 * dx, (idx / n) as f64 * dx]
    }

    pub fn same_as(&self, other: &WaveGrid) -> bool {
        self.spec == other.spec
    }
}

pub(crate) fn signed(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda1_matches_box_size() {
        let g = WaveGrid::with_default_dealiasing(3.0, 16).unwrap();
        assert!((g.lambda1() - (2.0 * PI / 3.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn wavevectors_are_integer_multiples() {
        let g = WaveGrid::with_default_dealiasing(2.0, 8).unwrap();
        for idx in 0..g.len() {
            let j = g.index_of(idx);
            let k = g.wavevector(idx);
            assert!(j[0].abs() <= 4 && j[1].abs() <= 4);
            assert!((k[0] - PI * j[0] as f64).abs() < 1e-14);
            assert!((k[1] - PI * j[1] as f64).abs() < 1e-14);
            assert_eq!(g.flat_index(j), idx);
            let c = g.conjugate_index(idx);
            let jc = g.index_of(c);
            if j[0].abs() < 4 && j[1].abs() < 4 {
                assert_eq!(jc, [-j[0], -j[1]]);
            }
        }
    }

    #[test]
    fn truncation_is_circular_and_excludes_mean() {
        let g = WaveGrid::with_default_dealiasing(1.0, 32).unwrap();
        assert!(!g.is_retained(0));
        for &idx in g.retained() {
            let j = g.index_of(idx);
            assert!(((j[0] * j[0] + j[1] * j[1]) as f64).sqrt() < 32.0 / 3.0);
        }
        assert!(g.is_retained(g.flat_index([10, 0])));
        assert!(!g.is_retained(g.flat_index([8, 8])));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(WaveGrid::new(1.0, 12, TWO_THIRDS).is_err());
        assert!(WaveGrid::new(-1.0, 16, TWO_THIRDS).is_err());
        assert!(WaveGrid::new(1.0, 16, 1.5).is_err());
    }
}
