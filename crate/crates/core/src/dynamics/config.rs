use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::noise::NoiseModel;
use crate::observables::{
    observe_nodes, observe_volumes, oversample_average, BasisKind, NodePlacement, ObservationKind, ObservationVector,
};
use crate::spectral::{leray_project, norm, SpectralField, Space, WaveGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Exponential Euler: exact viscous factor, explicit forcing terms.
    #[default]
    Etd1,
    /// Two-stage exponential Runge-Kutta, for deterministic trajectories.
    Etd2rk,
}

/// Reference-equation parameters. The grid is the forcing's grid.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub nu: f64,
    pub forcing: SpectralField,
    pub dt: f64,
    pub t_spinup: f64,
    pub scheme: Scheme,
}

impl SolverConfig {
    pub fn grid(&self) -> &Arc<WaveGrid> {
        self.forcing.grid()
    }

    /// Default spin-up horizon `20 / (nu lambda_1)`.
    pub fn default_spinup(nu: f64, grid: &WaveGrid) -> f64 {
        20.0 / (nu * grid.lambda1())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::Config(format!("viscosity must be positive, got {}", self.nu)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_spinup >= 0.0) {
            return Err(Error::Config(format!("spin-up time must be non-negative, got {}", self.t_spinup)));
        }
        let scale = norm(&self.forcing, Space::H).max(1e-300);
        if self.forcing.divergence_residual() > 1e-10 * scale.max(1.0) {
            return Err(Error::Config("forcing is not divergence-free".into()));
        }
        if self.forcing.coeffs()[0][0].norm() + self.forcing.coeffs()[1][0].norm() != 0.0 {
            return Err(Error::Config("forcing has a nonzero spatial mean".into()));
        }
        Ok(())
    }
}

/// `G = |f|_H / (nu^2 lambda_1)`.
pub fn grashof(cfg: &SolverConfig) -> f64 {
    norm(&cfg.forcing, Space::H) / (cfg.nu * cfg.nu * cfg.grid().lambda1())
}

/// Time-independent forcing on the shell `1 <= |j| <= 2` with seeded random
/// amplitudes and phases, scaled so that the Grashof number equals `target`.
pub fn shell_forcing(grid: &Arc<WaveGrid>, nu: f64, target: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = [vec![Complex64::new(0.0, 0.0); grid.len()], vec![Complex64::new(0.0, 0.0); grid.len()]];
    let mut shell: Vec<[i64; 2]> = Vec::new();
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            let s = a * a + b * b;
            if (1..=4).contains(&s) {
                shell.push([a, b]);
            }
        }
    }
    for j in shell {
        // Fill one representative per conjugate pair.
        if j[0] < 0 || (j[0] == 0 && j[1] < 0) {
            continue;
        }
        let idx = grid.flat_index(j);
        let cidx = grid.flat_index([-j[0], -j[1]]);
        for comp in raw.iter_mut() {
            let amp: f64 = rng.random_range(0.5..1.0);
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let z = Complex64::from_polar(amp, phase);
            comp[idx] = z;
            comp[cidx] = z.conj();
        }
    }
    let f = leray_project(grid, raw);
    let h = norm(&f, Space::H);
    let want = target * nu * nu * grid.lambda1();
    if h == 0.0 {
        f
    } else {
        &f * (want / h)
    }
}

/// How the truth is observed and fed back.
#[derive(Debug, Clone)]
pub struct AssimilationConfig {
    /// Relaxation rate `mu`, 1/time.
    pub mu: f64,
    /// Squares per side of the lifting partition.
    pub squares: usize,
    pub basis: BasisKind,
    pub observation: ObservationKind,
    pub placement: NodePlacement,
    /// Observations are taken on a `q` times finer partition and averaged.
    pub refinement: usize,
    /// Noise on the fine observations.
    pub noise: NoiseModel,
    /// Observe every `cadence` steps, holding the last observation between.
    pub cadence: usize,
}

impl AssimilationConfig {
    pub fn fine_squares(&self) -> usize {
        self.squares * self.refinement
    }

    /// Number of noisy scalar channels, `2 (q K)^2`.
    pub fn channels(&self) -> usize {
        2 * self.fine_squares().pow(2)
    }

    pub fn validate(&self, solver: &SolverConfig) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Config(format!("nudging rate must be positive, got {}", self.mu)));
        }
        if self.mu * solver.dt > 0.5 {
            return Err(Error::Config(format!(
                "explicit nudging needs mu dt <= 1/2, got mu = {} and dt = {}",
                self.mu, solver.dt
            )));
        }
        if self.refinement == 0 || self.cadence == 0 || self.squares == 0 {
            return Err(Error::Config("squares, refinement and cadence must be at least 1".into()));
        }
        let m = solver.grid().modes();
        if !m.is_multiple_of(self.squares) {
            return Err(Error::SquaresDoNotDivideGrid { squares: self.squares, modes: m });
        }
        if self.observation == ObservationKind::Volume && !m.is_multiple_of(self.fine_squares()) {
            return Err(Error::SquaresDoNotDivideGrid { squares: self.fine_squares(), modes: m });
        }
        if self.noise.channels != self.channels() {
            return Err(Error::Config(format!(
                "noise model has {} channels, observations need {}",
                self.noise.channels,
                self.channels()
            )));
        }
        Ok(())
    }

    /// Noise-free observation of `u` on the fine partition.
    pub fn observe_fine(&self, u: &SpectralField) -> Result<ObservationVector> {
        match self.observation {
            ObservationKind::Volume => observe_volumes(u, self.fine_squares()),
            ObservationKind::Nodal => observe_nodes(u, self.fine_squares(), &self.placement),
        }
    }

    /// Fine observation averaged onto the lifting partition.
    pub fn coarsen(&self, fine: &ObservationVector) -> Result<ObservationVector> {
        if self.refinement == 1 {
            Ok(fine.clone())
        } else {
            oversample_average(fine, self.refinement)
        }
    }

    pub fn observe(&self, u: &SpectralField) -> Result<ObservationVector> {
        self.coarsen(&self.observe_fine(u)?)
    }
}
