use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mollifier::Mollifier;
use super::observe::step_profile;
use super::vector::{ObservationVector, Squares};
use crate::spectral::{leray_project, Fft2, SpectralField, WaveGrid};
use crate::{Error, Result};

/// Mollifier radius as a fraction of the square side.
pub const MOLLIFIER_FRACTION: f64 = 0.1;

/// Recommended minimum grid points per square side for the mollified basis.
pub const MOLLIFIED_POINTS_PER_SIDE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Step,
    Mollified,
}

/// The lifting `zeta -> sum_d zeta_d ell_d` on a square partition.
///
/// All `ell_d` are translates of one profile, so only the Fourier
/// coefficients of `psi_1` (mean removed) are stored and the lifting is done
/// by a `K x K` DFT of the observations.
#[derive(Debug, Clone)]
pub struct InterpolantBasis {
    kind: BasisKind,
    squares: Squares,
    grid: Arc<WaveGrid>,
    profile: Vec<Complex64>,
    fft: Arc<Fft2>,
    warnings: Vec<String>,
}

pub fn build_basis(kind: BasisKind, squares: usize, grid: &Arc<WaveGrid>) -> Result<InterpolantBasis> {
    let sq = Squares::new(grid.length(), squares)?;
    sq.check_divides(grid.modes())?;
    let (h, l) = (sq.side(), grid.length());
    let mut warnings = Vec::new();
    let mut profile: Vec<Complex64> = (0..grid.len()).map(|idx| step_profile(grid.wavevector(idx), h, l)).collect();
    if kind == BasisKind::Mollified {
        let per_side = grid.modes() / squares;
        if per_side < MOLLIFIED_POINTS_PER_SIDE {
            warnings.push(format!(
                "mollifier under-resolved: {per_side} grid points per square side, {MOLLIFIED_POINTS_PER_SIDE} recommended"
            ));
        }
        let mollifier = Mollifier::new();
        let eps = MOLLIFIER_FRACTION * h;
        let lambda = 2.0 * std::f64::consts::PI / l;
        let mut cache: HashMap<i64, f64> = HashMap::new();
        for (idx, p) in profile.iter_mut().enumerate() {
            let j = grid.index_of(idx);
            let jsq = j[0] * j[0] + j[1] * j[1];
            let r = *cache.entry(jsq).or_insert_with(|| mollifier.transform(lambda * (jsq as f64).sqrt() * eps));
            *p *= r;
        }
    }
    profile[0] = Complex64::new(0.0, 0.0);
    Ok(InterpolantBasis {
        kind,
        squares: sq,
        grid: grid.clone(),
        profile,
        fft: Arc::new(Fft2::new(squares)),
        warnings,
    })
}

impl InterpolantBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn squares(&self) -> &Squares {
        &self.squares
    }

    pub fn per_side(&self) -> usize {
        self.squares.per_side
    }

    /// `D = 2N`.
    pub fn dimension(&self) -> usize {
        2 * self.squares.count()
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Fourier coefficient of `ell_1`'s nonzero component at grid index `idx`.
    pub fn profile(&self, idx: usize) -> Complex64 {
        self.profile[idx]
    }

    /// `sum_d zeta_d ell_d` before projection, on retained modes only.
    pub fn lift_unprojected(&self, zeta: &ObservationVector) -> Result<[Vec<Complex64>; 2]> {
        if zeta.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: zeta.len() });
        }
        let k = self.squares.per_side;
        let hats = [0, 1].map(|c| {
            let mut z: Vec<Complex64> = zeta.component(c).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
            self.fft.forward(&mut z);
            z
        });
        let g = &self.grid;
        let mut raw = [vec![Complex64::new(0.0, 0.0); g.len()], vec![Complex64::new(0.0, 0.0); g.len()]];
        for &idx in g.retained() {
            let j = g.index_of(idx);
            let bin = j[0].rem_euclid(k as i64) as usize + j[1].rem_euclid(k as i64) as usize * k;
            for c in 0..2 {
                raw[c][idx] = self.profile[idx] * hats[c][bin];
            }
        }
        Ok(raw)
    }

    /// `Pi L_h(zeta) = sum_d zeta_d gamma_d`.
    pub fn interpolate(&self, zeta: &ObservationVector) -> Result<SpectralField> {
        Ok(leray_project(&self.grid, self.lift_unprojected(zeta)?))
    }

    /// `gamma_d = Pi ell_d`, zero based `d`.
    pub fn gamma(&self, d: usize) -> Result<SpectralField> {
        let mut e = ObservationVector::zeros(self.squares.per_side, super::ObservationKind::Volume);
        if d >= e.len() {
            return Err(Error::DimensionMismatch { expected: e.len(), got: d + 1 });
        }
        e.values[d] = 1.0;
        self.interpolate(&e)
    }

    /// `sum_d |gamma_d|^2` with squared-norm weight `w(|k|^2)`; `w = 1` gives
    /// the `H` norm, `w = |k|^2` the `V` norm.
    pub fn gamma_norm_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let l2 = g.length() * g.length();
        let s: f64 = g.retained().iter().map(|&idx| weight(g.ksq(idx)) * self.profile[idx].norm_sqr()).sum();
        self.squares.count() as f64 * l2 * s
    }

    /// `sum_d ||ell_d||_{L^2}^2`. Exact for the step basis; for the
    /// mollified basis the sum over all grid modes.
    pub fn ell_norm_sum(&self) -> f64 {
        let n = self.squares.count() as f64;
        let l2 = self.grid.length().powi(2);
        match self.kind {
            BasisKind::Step => {
                let h2 = self.squares.side().powi(2);
                2.0 * n * (h2 - h2 * h2 / l2)
            }
            BasisKind::Mollified => 2.0 * n * l2 * self.profile.iter().map(|z| z.norm_sqr()).sum::<f64>(),
        }
    }

    /// Nonzero component of `ell_{2n+c}` sampled on the grid. The step basis
    /// is evaluated directly; the mollified basis is synthesised from all
    /// grid modes.
    pub fn ell_on_grid(&self, n: usize) -> Vec<f64> {
        let g = &self.grid;
        let m = g.modes();
        match self.kind {
            BasisKind::Step => {
                let h2l2 = (self.squares.side() / g.length()).powi(2);
                (0..g.len())
                    .map(|p| if self.squares.locate(g.point(p)) == n { 1.0 - h2l2 } else { -h2l2 })
                    .collect()
            }
            BasisKind::Mollified => {
                let s = self.squares.corner(n);
                let mut data: Vec<Complex64> = (0..g.len())
                    .map(|idx| {
                        let k = g.wavevector(idx);
                        self.profile[idx] * Complex64::from_polar(1.0, -(k[0] * s[0] + k[1] * s[1]))
                    })
                    .collect();
                debug_assert_eq!(data.len(), m * m);
                g.fft().inverse(&mut data);
                data.into_iter().map(|z| z.re).collect()
            }
        }
    }
}
