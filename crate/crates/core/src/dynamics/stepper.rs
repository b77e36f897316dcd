use std::sync::Arc;

use num_complex::Complex64;

use super::config::{AssimilationConfig, Scheme, SolverConfig};
use crate::observables::{InterpolantBasis, ObservationVector};
use crate::spectral::{bilinear, SpectralField, WaveGrid};
use crate::{Error, Result};

/// `(1 - e^{-x}) / x`.
fn phi1(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(x - 1 + e^{-x}) / x^2`.
fn phi2(x: f64) -> f64 {
    if x < 1e-4 {
        0.5 - x / 6.0 + x * x / 24.0
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

/// Exponential integrator for `du/dt + nu A u = N(u)`, with the viscous
/// factors tabulated once per `(grid, nu, dt)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    nu: f64,
    dt: f64,
    scheme: Scheme,
    forcing: SpectralField,
    decay: Vec<f64>,
    gain1: Vec<f64>,
    gain2: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.grid();
        let mut decay = vec![0.0; g.len()];
        let mut gain1 = vec![0.0; g.len()];
        let mut gain2 = vec![0.0; g.len()];
        for &idx in g.retained() {
            let x = cfg.nu * g.ksq(idx) * cfg.dt;
            decay[idx] = (-x).exp();
            gain1[idx] = cfg.dt * phi1(x);
            gain2[idx] = cfg.dt * phi2(x);
        }
        Ok(Self { nu: cfg.nu, dt: cfg.dt, scheme: cfg.scheme, forcing: cfg.forcing.clone(), decay, gain1, gain2 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        self.forcing.grid()
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    /// `f - B(u, u) + extra`.
    fn explicit(&self, u: &SpectralField, extra: Option<&SpectralField>) -> Result<SpectralField> {
        let mut n = bilinear(u, u)?;
        n.scale(-1.0);
        n += &self.forcing;
        if let Some(e) = extra {
            n += e;
        }
        Ok(n)
    }

    fn combine(&self, u: &SpectralField, n: &SpectralField, gain: &[f64]) -> SpectralField {
        let g = self.grid().clone();
        let mut out = u.clone();
        let c = out.coeffs_mut();
        for &idx in g.retained() {
            for comp in 0..2 {
                c[comp][idx] = self.decay[idx] * c[comp][idx] + gain[idx] * n.coeffs()[comp][idx];
            }
        }
        out
    }

    fn checked(out: SpectralField, t: f64) -> Result<SpectralField> {
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::BlowUp { time: t })
        }
    }

    /// One step of the reference equation from time `t`.
    pub fn reference(&self, u: &SpectralField, t: f64) -> Result<SpectralField> {
        u.check_grid(&self.forcing)?;
        let n0 = self.explicit(u, None)?;
        let a = self.combine(u, &n0, &self.gain1);
        let out = match self.scheme {
            Scheme::Etd1 => a,
            Scheme::Etd2rk => {
                let n1 = self.explicit(&a, None)?;
                let mut out = a;
                let c = out.coeffs_mut();
                let g = self.grid().clone();
                for &idx in g.retained() {
                    for comp in 0..2 {
                        let d: Complex64 = n1.coeffs()[comp][idx] - n0.coeffs()[comp][idx];
                        c[comp][idx] += self.gain2[idx] * d;
                    }
                }
                out
            }
        };
        Self::checked(out, t + self.dt)
    }

    /// One exponential-Euler step of the nudged equation from time `t`,
    /// given the observation `y` of the truth (noise included) on the
    /// lifting partition:
    /// `u' = e^{-nu A dt} u + dt phi1(nu A dt) [f - B(u, u) - mu Pi L_h(O_h u - y)]`.
    pub fn nudged(
        &self,
        u: &SpectralField,
        y: &ObservationVector,
        acfg: &AssimilationConfig,
        basis: &InterpolantBasis,
        t: f64,
    ) -> Result<SpectralField> {
        u.check_grid(&self.forcing)?;
        let mut innovation = acfg.observe(u)?;
        innovation.axpy(-1.0, y)?;
        let mut relax = basis.interpolate(&innovation)?;
        relax.scale(-acfg.mu);
        let n = self.explicit(u, Some(&relax))?;
        Self::checked(self.combine(u, &n, &self.gain1), t + self.dt)
    }
}

/// One step of the reference equation (tabulates the integrator afresh).
pub fn step_reference(u: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    Stepper::new(cfg)?.reference(u, 0.0)
}

/// One nudged step (tabulates the integrator afresh).
pub fn step_nudged(
    u: &SpectralField,
    y: &ObservationVector,
    cfg: &SolverConfig,
    acfg: &AssimilationConfig,
    basis: &InterpolantBasis,
) -> Result<SpectralField> {
    acfg.validate(cfg)?;
    Stepper::new(cfg)?.nudged(u, y, acfg, basis, 0.0)
}

/// `dt max|u| 2 pi M / L`.
pub fn cfl_number(u: &SpectralField, dt: f64) -> f64 {
    let g = u.grid();
    let [a, b] = u.to_physical();
    let vmax = a.iter().zip(&b).map(|(x, y)| (x * x + y * y).sqrt()).fold(0.0, f64::max);
    dt * vmax * 2.0 * std::f64::consts::PI * g.modes() as f64 / g.length()
}
