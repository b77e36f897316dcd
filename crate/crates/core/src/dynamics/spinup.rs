use serde::{Deserialize, Serialize};

use super::config::{grashof, SolverConfig};
use super::stepper::{cfl_number, Stepper};
use crate::spectral::{norm_sq, SpectralField, Space};
use crate::Result;

/// CFL level above which runs are flagged.
pub const CFL_LIMIT: f64 = 0.5;

/// How often (in steps) the CFL number is sampled.
const CFL_EVERY: usize = 25;

/// Snapshot of the a-priori quantities at the end of spin-up.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AprioriDiagnostics {
    pub grashof: f64,
    pub time: f64,
    pub h2: f64,
    pub v2: f64,
    pub a2: f64,
    /// `2 nu^2 G^2`.
    pub bound_h2: f64,
    /// `2 nu^2 lambda_1 G^2`.
    pub bound_v2: f64,
    /// Measured constant `|AU|^2 / (nu^2 lambda_1^2 (1 + G)^4)`.
    pub a2_constant: f64,
    pub max_cfl: f64,
    pub warnings: Vec<String>,
}

impl AprioriDiagnostics {
    pub fn within_bounds(&self) -> bool {
        self.h2 <= self.bound_h2 && self.v2 <= self.bound_v2
    }
}

#[derive(Debug, Clone)]
pub struct SpinUp {
    pub state: SpectralField,
    pub steps: usize,
    pub diagnostics: AprioriDiagnostics,
}

fn snapshot(cfg: &SolverConfig, u: &SpectralField, time: f64, max_cfl: f64) -> AprioriDiagnostics {
    let g = grashof(cfg);
    let nu = cfg.nu;
    let l1 = cfg.grid().lambda1();
    let h2 = norm_sq(u, Space::H);
    let v2 = norm_sq(u, Space::V);
    let a2 = norm_sq(u, Space::DA);
    let mut warnings = Vec::new();
    if max_cfl > CFL_LIMIT {
        warnings.push(format!("CFL number reached {max_cfl:.3}, above {CFL_LIMIT}"));
    }
    AprioriDiagnostics {
        grashof: g,
        time,
        h2,
        v2,
        a2,
        bound_h2: 2.0 * nu * nu * g * g,
        bound_v2: 2.0 * nu * nu * l1 * g * g,
        a2_constant: a2 / (nu * nu * l1 * l1 * (1.0 + g).powi(4)),
        max_cfl,
        warnings,
    }
}

/// Integrates the reference equation for `cfg.t_spinup`.
pub fn spin_up(u0: &SpectralField, cfg: &SolverConfig) -> Result<SpinUp> {
    let stepper = Stepper::new(cfg)?;
    let steps = (cfg.t_spinup / cfg.dt).round() as usize;
    let mut u = u0.clone();
    let mut max_cfl = cfl_number(&u, cfg.dt);
    for s in 0..steps {
        u = stepper.reference(&u, s as f64 * cfg.dt)?;
        if (s + 1) % CFL_EVERY == 0 {
            max_cfl = max_cfl.max(cfl_number(&u, cfg.dt));
        }
    }
    let diagnostics = snapshot(cfg, &u, steps as f64 * cfg.dt, max_cfl);
    Ok(SpinUp { state: u, steps, diagnostics })
}

/// A-priori bounds over a window `[t, t + T]` of the reference trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryBounds {
    pub window: f64,
    pub max_h2: f64,
    pub max_v2: f64,
    /// `int_t^{t+T} ||U||_V^2`.
    pub integral_v2: f64,
    /// `int_t^{t+T} |AU|_H^2`.
    pub integral_a2: f64,
    pub bound_h2: f64,
    pub bound_v2: f64,
    /// `2 (1 + T nu lambda_1) nu G^2`.
    pub bound_integral_v2: f64,
    /// `2 (1 + T nu lambda_1) nu lambda_1 G^2`.
    pub bound_integral_a2: f64,
    pub max_a2_constant: f64,
    pub max_cfl: f64,
}

impl TrajectoryBounds {
    pub fn pass(&self) -> bool {
        self.max_h2 <= self.bound_h2
            && self.max_v2 <= self.bound_v2
            && self.integral_v2 <= self.bound_integral_v2
            && self.integral_a2 <= self.bound_integral_a2
    }
}

/// Advances `u` over a window of length `window` and records the a-priori
/// quantities; integrals use the trapezoid rule on the step grid. Returns
/// the state at the end of the window with the bounds.
pub fn monitor_bounds(u: &SpectralField, cfg: &SolverConfig, window: f64) -> Result<(SpectralField, TrajectoryBounds)> {
    let stepper = Stepper::new(cfg)?;
    let steps = (window / cfg.dt).round().max(1.0) as usize;
    let g = grashof(cfg);
    let nu = cfg.nu;
    let l1 = cfg.grid().lambda1();
    let t = steps as f64 * cfg.dt;
    let mut state = u.clone();
    let mut rec = TrajectoryBounds {
        window: t,
        max_h2: 0.0,
        max_v2: 0.0,
        integral_v2: 0.0,
        integral_a2: 0.0,
        bound_h2: 2.0 * nu * nu * g * g,
        bound_v2: 2.0 * nu * nu * l1 * g * g,
        bound_integral_v2: 2.0 * (1.0 + t * nu * l1) * nu * g * g,
        bound_integral_a2: 2.0 * (1.0 + t * nu * l1) * nu * l1 * g * g,
        max_a2_constant: 0.0,
        max_cfl: 0.0,
    };
    let mut prev = [norm_sq(&state, Space::V), norm_sq(&state, Space::DA)];
    let observe = |s: &SpectralField, rec: &mut TrajectoryBounds| {
        let h2 = norm_sq(s, Space::H);
        let v2 = norm_sq(s, Space::V);
        let a2 = norm_sq(s, Space::DA);
        rec.max_h2 = rec.max_h2.max(h2);
        rec.max_v2 = rec.max_v2.max(v2);
        rec.max_a2_constant = rec.max_a2_constant.max(a2 / (nu * nu * l1 * l1 * (1.0 + g).powi(4)));
        [v2, a2]
    };
    observe(&state, &mut rec);
    for s in 0..steps {
        state = stepper.reference(&state, s as f64 * cfg.dt)?;
        let cur = observe(&state, &mut rec);
        rec.integral_v2 += 0.5 * cfg.dt * (prev[0] + cur[0]);
        rec.integral_a2 += 0.5 * cfg.dt * (prev[1] + cur[1]);
        prev = cur;
        if (s + 1) % CFL_EVERY == 0 {
            rec.max_cfl = rec.max_cfl.max(cfl_number(&state, cfg.dt));
        }
    }
    Ok((state, rec))
}
