use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{Constants, STEP_C1};
use crate::noise::stream;
use crate::observables::{
    build_basis, verify_approximation, ApproximationMode, BasisKind, DiscRule, PartitionOfUnity, PartitionReport,
};
use crate::spectral::random::{random_field, symmetrize, Spectrum};
use crate::spectral::{norm_sq, SpectralField, Space, WaveGrid, TWO_THIRDS};
use crate::{Error, Result};

/// Multiplier applied to every empirical maximum.
pub const SAFETY: f64 = 1.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Grid for the inequality constants.
    pub modes: usize,
    pub length: f64,
    /// Random fields per inequality constant.
    pub trials: usize,
    pub seed: u64,
    /// Squares per side and construction resolution of the mollified
    /// partition measured for `c`.
    pub partition_squares: usize,
    pub partition_resolution: usize,
    /// Random fields and partition size for the nodal approximation constants.
    pub approximation_trials: usize,
    pub approximation_squares: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            modes: 64,
            length: 2.0 * std::f64::consts::PI,
            trials: 10_000,
            seed: 7,
            partition_squares: 4,
            partition_resolution: 240,
            approximation_trials: 200,
            approximation_squares: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub options: CalibrationOptions,
    /// Largest observed ratios before the safety factor.
    pub ladyzhenskaya_max: f64,
    pub brezis_gallouet_max: f64,
    pub partition: PartitionSummary,
    pub step_r1_max: f64,
    pub nodal_fit: [f64; 2],
    pub nodal_bound: [f64; 2],
    pub constants: Constants,
    /// `max h^2 |d2 psi~|`, reported apart from `c`.
    pub hessian_constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub gradient_constant: f64,
    pub gradient_l2: f64,
    pub gradient_gram_inside: f64,
    pub gram_inside: f64,
    pub partition_error: f64,
}

impl From<&PartitionReport> for PartitionSummary {
    fn from(r: &PartitionReport) -> Self {
        Self {
            gradient_constant: r.gradient_constant,
            gradient_l2: r.gradient_l2,
            gradient_gram_inside: r.gradient_gram_inside,
            gram_inside: r.gram_inside,
            partition_error: r.partition_error,
        }
    }
}

/// `u = curl psi` for a periodised stream function concentrated near
/// `x0`: an anisotropic Gaussian of widths `s` rotated by `theta`, or, with
/// `dipole`, its derivative across the long axis, whose velocity is a
/// single jet with a speed maximum at the centre.
pub fn localized(grid: &Arc<WaveGrid>, s: [f64; 2], theta: f64, x0: [f64; 2], dipole: bool) -> SpectralField {
    let n = grid.len();
    let (c, sn) = (theta.cos(), theta.sin());
    let mut raw = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    for &idx in grid.retained() {
        let k = grid.wavevector(idx);
        let kr = [c * k[0] + sn * k[1], -sn * k[0] + c * k[1]];
        let amp = (-0.5 * (s[0] * s[0] * kr[0] * kr[0] + s[1] * s[1] * kr[1] * kr[1])).exp();
        let mut psi = Complex64::from_polar(amp, -(k[0] * x0[0] + k[1] * x0[1]));
        if dipole {
            psi *= Complex64::i() * kr[1] * s[1];
        }
        raw[0][idx] = Complex64::i() * k[1] * psi;
        raw[1][idx] = -Complex64::i() * k[0] * psi;
    }
    symmetrize(grid, &mut raw);
    SpectralField::from_modes(grid, raw).expect("layout matches grid")
}

/// One calibration sample: a random spectrum, a vortex or a jet.
fn sample(grid: &Arc<WaveGrid>, seed: u64, trial: usize) -> SpectralField {
    let mut rng = stream(seed, trial as u64, 0);
    let cap = grid.modes() as f64 / 3.0;
    let dx = grid.length() / grid.modes() as f64;
    let width = |rng: &mut rand_chacha::ChaCha8Rng| dx * 2f64.powf(rng.random_range(1.0..(grid.length() / (4.0 * dx)).log2()));
    match trial % 3 {
        0 => {
            let decay = rng.random_range(0.0..3.5);
            let band = 2f64.powf(rng.random_range(0.0..cap.log2())).max(1.0);
            random_field(grid, Spectrum::new(decay, band), &mut rng)
        }
        kind => {
            let s0 = width(&mut rng);
            let s = [s0, s0 * 2f64.powf(rng.random_range(-1.5..1.5))];
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let x0 = [rng.random_range(0.0..grid.length()), rng.random_range(0.0..grid.length())];
            localized(grid, s, theta, x0, kind == 2)
        }
    }
}

/// `(||u||_{L4}^2 / (|u| ||u||), ||u||_inf / (||u|| (1 + log(|Au|^2 / (lambda_1 ||u||^2)))))`.
pub fn inequality_ratios(u: &SpectralField) -> Option<[f64; 2]> {
    let grid = u.grid();
    let h2 = norm_sq(u, Space::H);
    let v2 = norm_sq(u, Space::V);
    let a2 = norm_sq(u, Space::DA);
    if !(h2 > 0.0 && v2 > 0.0) {
        return None;
    }
    let [a, b] = u.to_padded_physical();
    let np = a.len() as f64;
    let l2 = grid.length().powi(2);
    let mut s4 = 0.0;
    let mut sup: f64 = 0.0;
    for (x, y) in a.iter().zip(&b) {
        let m2 = x * x + y * y;
        s4 += m2 * m2;
        sup = sup.max(m2);
    }
    let l4sq = (s4 * l2 / np).sqrt();
    let lady = l4sq / (h2 * v2).sqrt();
    let bg = sup.sqrt() / (v2.sqrt() * (1.0 + (a2 / (grid.lambda1() * v2)).ln()));
    Some([lady, bg])
}

/// Empirical constants: inequality ratios over random and vortex fields,
/// the mollified partition constant from a measured partition, and the
/// approximation constants of both interpolants. Each maximum is inflated
/// by [`SAFETY`].
pub fn calibrate(options: &CalibrationOptions) -> Result<Calibration> {
    if options.trials == 0 || options.approximation_trials == 0 {
        return Err(Error::InvalidArgument("calibration needs at least one trial".into()));
    }
    let grid = WaveGrid::new(options.length, options.modes, TWO_THIRDS)?;
    let ratios: Vec<[f64; 2]> = (0..options.trials)
        .into_par_iter()
        .filter_map(|t| inequality_ratios(&sample(&grid, options.seed, t)))
        .collect();
    let lady = ratios.iter().map(|r| r[0]).fold(0.0, f64::max);
    let bg = ratios.iter().map(|r| r[1]).fold(0.0, f64::max);

    let pou = PartitionOfUnity::build(
        options.length,
        options.partition_squares,
        options.partition_resolution,
        DiscRule::default(),
    )?;
    let report = pou.report();
    let c_raw = report
        .gradient_constant
        .max(report.gradient_l2)
        .max(report.gradient_gram_inside)
        .max(report.gram_inside);

    let ka = options.approximation_squares;
    let agrid = WaveGrid::new(options.length, (32 * ka).next_power_of_two(), TWO_THIRDS)?;
    let step = build_basis(BasisKind::Step, ka, &agrid)?;
    let r1 = verify_approximation(&step, ApproximationMode::R1, options.approximation_trials, options.seed)?;
    let moll = build_basis(BasisKind::Mollified, ka, &agrid)?;
    let r2 = verify_approximation(&moll, ApproximationMode::R2, options.approximation_trials, options.seed)?;

    let constants = Constants {
        c_l: SAFETY * lady,
        c_b: SAFETY * bg,
        c: SAFETY * c_raw,
        c1: STEP_C1.max(SAFETY * r1.max_ratio),
        nodal_c1: SAFETY * r2.bound[0],
        nodal_c2: SAFETY * r2.bound[1],
    };
    Ok(Calibration {
        options: options.clone(),
        ladyzhenskaya_max: lady,
        brezis_gallouet_max: bg,
        partition: PartitionSummary::from(&report),
        step_r1_max: r1.max_ratio,
        nodal_fit: r2.fit,
        nodal_bound: r2.bound,
        constants,
        hessian_constant: report.hessian_constant,
    })
}
