use rayon::prelude::*;

use super::series::ErrorSeries;
use crate::dynamics::{cfl_number, spin_up, AssimilationConfig, SolverConfig, Stepper};
use crate::noise::{covariance_traces, stream, WienerStats};
use crate::observables::{build_basis, InterpolantBasis, ObservationLog, ObservationVector};
use crate::spectral::random::{random_field, with_h_norm, Spectrum};
use crate::spectral::{norm, norm_sq, SpectralField, Space};
use crate::{Error, Result};

/// Stream id reserved for the initial perturbation of each member, far
/// from any step index.
const PERTURBATION_STREAM: u64 = u64::MAX;

const CFL_EVERY: usize = 25;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub solver: SolverConfig,
    pub assimilation: AssimilationConfig,
    pub members: usize,
    /// Length of the assimilation run after spin-up.
    pub t_run: f64,
    /// Averaging window `T` of the time-averaged bounds.
    pub t_avg: f64,
    /// `|u_0 - U_0|_H` as a multiple of `|U_0|_H`.
    pub perturbation: f64,
    /// Record the error every this many steps.
    pub record_every: usize,
    /// Seed of the initial perturbations.
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn steps(&self) -> usize {
        (self.t_run / self.solver.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        self.assimilation.validate(&self.solver)?;
        if self.members == 0 || self.record_every == 0 {
            return Err(Error::Config("members and record_every must be at least 1".into()));
        }
        if !(self.t_avg > 0.0 && self.t_run > self.t_avg) || !(self.perturbation >= 0.0) {
            return Err(Error::Config(format!(
                "need t_run > t_avg > 0 and a non-negative perturbation, got t_run = {}, t_avg = {}, perturbation = {}",
                self.t_run, self.t_avg, self.perturbation
            )));
        }
        Ok(())
    }
}

/// Where the nudged members get their data.
#[derive(Debug, Clone, Copy)]
pub enum Observations<'a> {
    /// Observe the simulated truth and add independent noise per member.
    Simulated { record_log: bool },
    /// Read member 0's noisy data from a log.
    Replay(&'a ObservationLog),
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub series: ErrorSeries,
    pub truth: SpectralField,
    pub members: Vec<SpectralField>,
    pub traces: WienerStats,
    /// Member 0's noisy observations, when requested.
    pub log: Option<ObservationLog>,
    pub max_cfl: f64,
    pub warnings: Vec<String>,
}

/// Spins up the truth from rest, then runs the ensemble.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleRun> {
    let rest = SpectralField::zeros(cfg.solver.grid());
    let spun = spin_up(&rest, &cfg.solver)?;
    run_from(cfg, &spun.state, Observations::Simulated { record_log: false })
}

fn initial_member(cfg: &ExperimentConfig, truth: &SpectralField, member: usize) -> SpectralField {
    if cfg.perturbation == 0.0 {
        return truth.clone();
    }
    let grid = truth.grid();
    let mut rng = stream(cfg.seed, member as u64, PERTURBATION_STREAM);
    let spectrum = Spectrum::new(1.0, grid.modes() as f64 / 3.0);
    let delta = with_h_norm(random_field(grid, spectrum, &mut rng), cfg.perturbation * norm(truth, Space::H));
    truth + &delta
}

fn error_norms(u: &SpectralField, truth: &SpectralField) -> [f64; 3] {
    let v = u - truth;
    [norm_sq(&v, Space::H), norm_sq(&v, Space::V), norm_sq(&v, Space::DA)]
}

/// Data for member `m` at observation `k`: the fine observation of the
/// truth plus `dbeta / Delta`, averaged onto the lifting partition.
fn noisy_observation(
    acfg: &AssimilationConfig,
    fine: &ObservationVector,
    interval: f64,
    member: usize,
    k: u64,
) -> Result<ObservationVector> {
    if acfg.noise.sigma2 == 0.0 {
        return acfg.coarsen(fine);
    }
    let dbeta = acfg.noise.increments(interval, member as u64, k);
    let noise = ObservationVector::from_values(dbeta, fine.squares, fine.kind)?;
    let mut y = fine.clone();
    y.axpy(1.0 / interval, &noise)?;
    acfg.coarsen(&y)
}

/// Runs the truth and all members in lockstep from `truth0`. Members are
/// stepped in parallel; every reduction runs in member order.
pub fn run_from(cfg: &ExperimentConfig, truth0: &SpectralField, source: Observations<'_>) -> Result<EnsembleRun> {
    cfg.validate()?;
    let acfg = &cfg.assimilation;
    let basis: InterpolantBasis = build_basis(acfg.basis, acfg.squares, cfg.solver.grid())?;
    let traces = covariance_traces(&basis, acfg.noise.sigma2);
    let stepper = Stepper::new(&cfg.solver)?;
    let dt = stepper.dt();
    let interval = dt * acfg.cadence as f64;
    let steps = cfg.steps();

    if let Observations::Replay(log) = source {
        if cfg.members != 1 {
            return Err(Error::Config("replaying an observation log needs exactly one member".into()));
        }
        let need = acfg.squares * acfg.squares * 2;
        if log.dimension() != need {
            return Err(Error::DimensionMismatch { expected: need, got: log.dimension() });
        }
    }
    let mut log = match source {
        Observations::Simulated { record_log: true } => Some(ObservationLog::new(2 * acfg.squares * acfg.squares)),
        _ => None,
    };

    let mut truth = truth0.clone();
    let mut members: Vec<SpectralField> = (0..cfg.members).map(|m| initial_member(cfg, truth0, m)).collect();
    let mut series = ErrorSeries::new(cfg.members);
    let record = |series: &mut ErrorSeries, t: f64, members: &[SpectralField], truth: &SpectralField| {
        let norms: Vec<[f64; 3]> = members.par_iter().map(|u| error_norms(u, truth)).collect();
        series.push(t, &norms)
    };
    record(&mut series, 0.0, &members, &truth)?;

    let mut data: Vec<ObservationVector> = Vec::new();
    let mut max_cfl: f64 = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        if n % acfg.cadence == 0 {
            let k = (n / acfg.cadence) as u64;
            data = match source {
                Observations::Replay(log) => {
                    let row = k as usize;
                    if row >= log.len() {
                        return Err(Error::ObservationLog(format!("log ends before observation {} at t = {t}", row + 1)));
                    }
                    let lt = log.times()[row];
                    if (lt - t).abs() > 1e-9 * t.abs().max(1.0) {
                        return Err(Error::ObservationLog(format!(
                            "row {} has time {lt}, expected {t}",
                            row + 1
                        )));
                    }
                    vec![ObservationVector::from_values(log.row(row).to_vec(), acfg.squares, acfg.observation)?]
                }
                Observations::Simulated { .. } => {
                    let fine = acfg.observe_fine(&truth)?;
                    if acfg.noise.sigma2 == 0.0 {
                        vec![acfg.coarsen(&fine)?]
                    } else {
                        (0..cfg.members)
                            .into_par_iter()
                            .map(|m| noisy_observation(acfg, &fine, interval, m, k))
                            .collect::<Result<Vec<_>>>()?
                    }
                }
            };
            if let Some(log) = log.as_mut() {
                log.push(t, data[0].values.clone())?;
            }
        }
        let stepped: Vec<Result<SpectralField>> = members
            .par_iter()
            .enumerate()
            .map(|(m, u)| {
                let y = if data.len() == 1 { &data[0] } else { &data[m] };
                stepper.nudged(u, y, acfg, &basis, t).map_err(|e| match e {
                    Error::BlowUp { time } => Error::MemberBlowUp { member: m, time },
                    other => other,
                })
            })
            .collect();
        for (slot, r) in members.iter_mut().zip(stepped) {
            *slot = r?;
        }
        truth = stepper.reference(&truth, t)?;
        if n % CFL_EVERY == 0 {
            max_cfl = max_cfl.max(cfl_number(&truth, dt));
        }
        if (n + 1) % cfg.record_every == 0 || n + 1 == steps {
            record(&mut series, (n + 1) as f64 * dt, &members, &truth)?;
        }
    }

    let mut warnings: Vec<String> = basis.warnings().to_vec();
    if max_cfl > crate::dynamics::CFL_LIMIT {
        warnings.push(format!("CFL number reached {max_cfl:.3}"));
    }
    Ok(EnsembleRun { series, truth, members, traces, log, max_cfl, warnings })
}

/// Integrates the truth alone for `cfg.t_run` and logs the noisy data that
/// member 0 of [`run_from`] would receive. Returns the log and the final
/// truth.
pub fn synthesize_observations(cfg: &ExperimentConfig, truth0: &SpectralField) -> Result<(ObservationLog, SpectralField)> {
    cfg.validate()?;
    let acfg = &cfg.assimilation;
    let stepper = Stepper::new(&cfg.solver)?;
    let dt = stepper.dt();
    let interval = dt * acfg.cadence as f64;
    let mut log = ObservationLog::new(2 * acfg.squares * acfg.squares);
    let mut truth = truth0.clone();
    for n in 0..cfg.steps() {
        let t = n as f64 * dt;
        if n % acfg.cadence == 0 {
            let fine = acfg.observe_fine(&truth)?;
            let y = noisy_observation(acfg, &fine, interval, 0, (n / acfg.cadence) as u64)?;
            log.push(t, y.values)?;
        }
        truth = stepper.reference(&truth, t)?;
    }
    Ok((log, truth))
}
