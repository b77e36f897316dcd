//! Fourier representation of periodic, zero-mean, divergence-free velocity
//! fields on `[0, L)^2` and the operators acting on them.

mod fft;
mod field;
mod grid;
pub mod random;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use fft::Fft2;
pub use field::SpectralField;
pub use grid::{GridSpec, WaveGrid, TWO_THIRDS};

use crate::Result;

/// Norms available through [`norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Space {
    /// `L^2` (Parseval) norm.
    H,
    /// `|A^{1/2} u|_H`.
    V,
    /// `|A u|_H`.
    DA,
    /// `|A^alpha u|_H`.
    Dalpha(f64),
    /// Euclidean `L^4` norm, exact on the padded grid.
    L4,
    /// Largest pointwise speed on the padded grid.
    Linf,
}

/// Leray projection of raw (conjugate-symmetric) coefficients: removes the
/// mean and every gradient component, and applies the Galerkin truncation.
pub fn leray_project(grid: &Arc<WaveGrid>, raw: [Vec<Complex64>; 2]) -> SpectralField {
    let [mut a, mut b] = raw;
    assert_eq!(a.len(), grid.len());
    assert_eq!(b.len(), grid.len());
    for idx in 0..grid.len() {
        if !grid.is_retained(idx) {
            a[idx] = Complex64::new(0.0, 0.0);
            b[idx] = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = grid.wavevector(idx);
        let ksq = grid.ksq(idx);
        let div = (a[idx] * k[0] + b[idx] * k[1]) / ksq;
        a[idx] -= div * k[0];
        b[idx] -= div * k[1];
    }
    SpectralField::from_projected(grid, [a, b])
}

/// Projects an already-represented field again (idempotent).
pub fn reproject(field: &SpectralField) -> SpectralField {
    leray_project(field.grid(), field.coeffs().clone())
}

/// Forward transform of sampled components followed by [`leray_project`].
pub fn from_physical(grid: &Arc<WaveGrid>, u1: &[f64], u2: &[f64]) -> SpectralField {
    let n = grid.len();
    assert!(u1.len() == n && u2.len() == n, "sample arrays must cover the grid");
    let mut packed: Vec<Complex64> = u1.iter().zip(u2).map(|(&a, &b)| Complex64::new(a, b)).collect();
    grid.fft().forward(&mut packed);
    let scale = 1.0 / n as f64;
    let (a, b) = unpack(grid, &packed, scale);
    leray_project(grid, [a, b])
}

/// Splits the transform of `x + i y` (real `x`, `y`) into the two transforms.
fn unpack(grid: &WaveGrid, packed: &[Complex64], scale: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.len();
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for idx in 0..n {
        let z = packed[idx];
        let zc = packed[grid.conjugate_index(idx)].conj();
        a[idx] = (z + zc) * (0.5 * scale);
        b[idx] = (z - zc) * Complex64::new(0.0, -0.5 * scale);
    }
    (a, b)
}

/// `A^alpha` applied modewise as multiplication by `|k|^{2 alpha}`.
pub fn stokes_power(field: &SpectralField, alpha: f64) -> SpectralField {
    let grid = Arc::clone(field.grid());
    let mut out = field.clone();
    if alpha == 0.0 {
        return out;
    }
    let coeffs = out.coeffs_mut();
    for idx in 0..grid.len() {
        let f = if grid.is_retained(idx) { grid.ksq(idx).powf(alpha) } else { 0.0 };
        coeffs[0][idx] *= f;
        coeffs[1][idx] *= f;
    }
    out
}

/// Dealiased advection term `B(u, v) = Pi((u . grad) v)`.
///
/// Both inputs carry only modes inside the circular truncation, so the
/// quadratic product is alias-free on the `M x M` grid.
pub fn bilinear(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_grid(v)?;
    let grid = u.grid();
    let n = grid.len();
    let fft = grid.fft();
    let i = Complex64::i();
    let (uc, vc) = (u.coeffs(), v.coeffs());
    let mut vel = vec![Complex64::new(0.0, 0.0); n];
    let mut dx1 = vel.clone();
    let mut dx2 = vel.clone();
    for &idx in grid.retained() {
        let k = grid.wavevector(idx);
        vel[idx] = uc[0][idx] + i * uc[1][idx];
        let packed_v = vc[0][idx] + i * vc[1][idx];
        dx1[idx] = i * k[0] * packed_v;
        dx2[idx] = i * k[1] * packed_v;
    }
    fft.inverse(&mut vel);
    fft.inverse(&mut dx1);
    fft.inverse(&mut dx2);
    // (u . grad) v packed as n1 + i n2; u is real so it multiplies both parts.
    let mut prod: Vec<Complex64> = (0..n).map(|p| dx1[p] * vel[p].re + dx2[p] * vel[p].im).collect();
    fft.forward(&mut prod);
    let (a, b) = unpack(grid, &prod, 1.0 / n as f64);
    Ok(leray_project(grid, [a, b]))
}

/// Norm of `field` in the requested space.
pub fn norm(field: &SpectralField, space: Space) -> f64 {
    match space {
        Space::H => field.inner(field).sqrt(),
        Space::V => field.weighted_inner(field, |k2| k2).sqrt(),
        Space::DA => field.weighted_inner(field, |k2| k2 * k2).sqrt(),
        Space::Dalpha(alpha) => field.weighted_inner(field, |k2| k2.powf(2.0 * alpha)).sqrt(),
        Space::L4 => {
            let [a, b] = field.to_padded_physical();
            let np = a.len();
            let l = field.grid().length();
            let sum: f64 = a.iter().zip(&b).map(|(x, y)| (x * x + y * y).powi(2)).sum();
            (sum * l * l / np as f64).powf(0.25)
        }
        Space::Linf => {
            let [a, b] = field.to_padded_physical();
            a.iter().zip(&b).map(|(x, y)| (x * x + y * y).sqrt()).fold(0.0, f64::max)
        }
    }
}

/// Squared norm; cheaper than squaring [`norm`] for the Hilbert spaces.
pub fn norm_sq(field: &SpectralField, space: Space) -> f64 {
    match space {
        Space::H => field.inner(field),
        Space::V => field.weighted_inner(field, |k2| k2),
        Space::DA => field.weighted_inner(field, |k2| k2 * k2),
        _ => norm(field, space).powi(2),
    }
}

/// Exact evaluation of the truncated trigonometric series at arbitrary
/// points; coordinates are wrapped into the fundamental domain.
pub fn evaluate_at_points(field: &SpectralField, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let grid = field.grid();
    let l = grid.length();
    let m = grid.modes() as i64;
    let half = m / 2;
    let base = 2.0 * std::f64::consts::PI / l;
    let coeffs = field.coeffs();
    let mut out = Vec::with_capacity(points.len());
    let mut e1 = vec![Complex64::new(0.0, 0.0); m as usize + 1];
    let mut e2 = e1.clone();
    for p in points {
        let x = [p[0].rem_euclid(l), p[1].rem_euclid(l)];
        for j in -half..=half {
            e1[(j + half) as usize] = Complex64::from_polar(1.0, base * j as f64 * x[0]);
            e2[(j + half) as usize] = Complex64::from_polar(1.0, base * j as f64 * x[1]);
        }
        let mut acc = [0.0; 2];
        for &idx in grid.retained() {
            let j = grid.index_of(idx);
            let phase = e1[(j[0] + half) as usize] * e2[(j[1] + half) as usize];
            acc[0] += (coeffs[0][idx] * phase).re;
            acc[1] += (coeffs[1][idx] * phase).re;
        }
        out.push(acc);
    }
    out
}
