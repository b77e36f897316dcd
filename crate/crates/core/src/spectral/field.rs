use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::WaveGrid;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Zero-mean periodic velocity field stored as truncated Fourier
/// coefficients, `u(x) = sum_k u_k exp(i k.x)`. Every constructor except
/// [`SpectralField::from_modes`] yields a divergence-free field.
///
/// Both velocity components use the full `M x M` layout of the owning
/// [`WaveGrid`]; modes outside the Galerkin truncation are kept at zero.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<WaveGrid>,
    coeffs: [Vec<Complex64>; 2],
}

impl SpectralField {
    pub fn zeros(grid: &Arc<WaveGrid>) -> Self {
        let n = grid.len();
        Self { grid: Arc::clone(grid), coeffs: [vec![ZERO; n], vec![ZERO; n]] }
    }

    /// Wraps coefficients that the caller guarantees are already projected.
    pub(crate) fn from_projected(grid: &Arc<WaveGrid>, coeffs: [Vec<Complex64>; 2]) -> Self {
        Self { grid: Arc::clone(grid), coeffs }
    }

    /// A truncated trigonometric polynomial that need not be
    /// divergence-free, e.g. a test function for the observation operators.
    /// Coefficients outside the truncation are dropped.
    pub fn from_modes(grid: &Arc<WaveGrid>, mut coeffs: [Vec<Complex64>; 2]) -> Result<Self> {
        for c in &coeffs {
            if c.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), got: c.len() });
            }
        }
        for c in coeffs.iter_mut() {
            for (idx, z) in c.iter_mut().enumerate() {
                if !grid.is_retained(idx) {
                    *z = ZERO;
                }
            }
        }
        Ok(Self::from_projected(grid, coeffs))
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 2] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 2] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> [Vec<Complex64>; 2] {
        self.coeffs
    }

    /// Coefficient pair at flat index `idx`.
    pub fn mode(&self, idx: usize) -> [Complex64; 2] {
        [self.coeffs[0][idx], self.coeffs[1][idx]]
    }

    pub(crate) fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.grid.modes(), other.grid.modes()))
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert!(self.grid.same_as(&other.grid), "axpy on mismatched grids");
        for c in 0..2 {
            for (x, y) in self.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *x += y * a;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in 0..2 {
            for x in self.coeffs[c].iter_mut() {
                *x *= a;
            }
        }
    }

    /// `L^2` inner product `<u, v> = int u . v dx`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.weighted_inner(other, |_| 1.0)
    }

    /// `sum_k w(|k|^2) Re(u_k . conj v_k)` scaled by `L^2`.
    pub(crate) fn weighted_inner(&self, other: &SpectralField, weight: impl Fn(f64) -> f64) -> f64 {
        assert!(self.grid.same_as(&other.grid), "inner product on mismatched grids");
        let mut acc = 0.0;
        for &idx in self.grid.retained() {
            let w = weight(self.grid.ksq(idx));
            let s = self.coeffs[0][idx] * other.coeffs[0][idx].conj()
                + self.coeffs[1][idx] * other.coeffs[1][idx].conj();
            acc += w * s.re;
        }
        acc * self.grid.length() * self.grid.length()
    }

    /// Largest modulus of `k . u_k` relative to the largest `|k| |u_k|`.
    pub fn divergence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let k = self.grid.wavevector(idx);
            let d = self.coeffs[0][idx] * k[0] + self.coeffs[1][idx] * k[1];
            worst = worst.max(d.norm());
            scale = scale.max(self.grid.ksq(idx).sqrt() * self.coeffs[0][idx].norm().max(self.coeffs[1][idx].norm()));
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Largest `|u_{-k} - conj(u_k)|`.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let c = self.grid.conjugate_index(idx);
            for comp in 0..2 {
                worst = worst.max((self.coeffs[comp][c] - self.coeffs[comp][idx].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Largest coefficient difference, used for exactness checks.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        let mut worst: f64 = 0.0;
        for c in 0..2 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Samples both velocity components on the `M x M` grid.
    pub fn to_physical(&self) -> [Vec<f64>; 2] {
        let n = self.grid.len();
        let mut packed: Vec<Complex64> = (0..n)
            .map(|i| self.coeffs[0][i] + Complex64::i() * self.coeffs[1][i])
            .collect();
        self.grid.fft().inverse(&mut packed);
        [packed.iter().map(|z| z.re).collect(), packed.iter().map(|z| z.im).collect()]
    }

    /// Samples both components on the `2M x 2M` zero-padded grid.
    pub(crate) fn to_padded_physical(&self) -> [Vec<f64>; 2] {
        let m = self.grid.modes();
        let p = 2 * m;
        let mut packed = vec![ZERO; p * p];
        for &idx in self.grid.retained() {
            let j = self.grid.index_of(idx);
            let pi = (j[1].rem_euclid(p as i64) as usize) * p + j[0].rem_euclid(p as i64) as usize;
            packed[pi] = self.coeffs[0][idx] + Complex64::i() * self.coeffs[1][idx];
        }
        self.grid.padded_fft().inverse(&mut packed);
        [packed.iter().map(|z| z.re).collect(), packed.iter().map(|z| z.im).collect()]
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}
