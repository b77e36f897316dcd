//! Command-line front end: configuration, experiment execution, replay of
//! recorded observations and artifact output.

mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

pub use config::RunConfig;

use crate::dynamics::{
    grashof, monitor_bounds, shell_forcing, spin_up, AprioriDiagnostics, AssimilationConfig, Checkpoint, SolverConfig,
    TrajectoryBounds,
};
use crate::harness::{
    calibrate, evaluate_bound, run_from, select_parameters, synthesize_observations, BoundContext, BoundMode,
    Calibration, Constants, ExperimentConfig, Observations, Selection, TheoremReport,
};
use crate::noise::NoiseModel;
use crate::observables::{BasisKind, NodePlacement, ObservationKind, ObservationLog};
use crate::spectral::{SpectralField, WaveGrid, TWO_THIRDS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Integrate the truth and log its noisy observations.
    Reference,
    /// One nudged trajectory, from simulated or replayed observations.
    Assimilate,
    /// A Monte Carlo ensemble of nudged trajectories.
    Ensemble,
    /// An ensemble checked against a bound; the bound is mandatory.
    Verify,
    /// Empirical constants only.
    Calibrate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "nudge", version, about = "Nudging data assimilation for 2D Navier-Stokes with noisy observations")]
pub struct Args {
    /// TOML run configuration.
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "ensemble")]
    pub mode: Mode,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub members: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// main1, cor1, cor2, main2, cor1main2, nodcor1 or nodes-oversampled.
    #[arg(long)]
    pub bound: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Observation log to assimilate instead of synthesized data.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: String,
    pub mode: Mode,
    pub resolved: RunConfig,
    pub seed: u64,
    pub version: String,
    pub constants: Option<Constants>,
    pub selection: Option<Selection>,
    /// User-chosen rate or partition alongside a bound: reported only.
    pub exploratory: bool,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub report: Option<TheoremReport>,
}

impl Outcome {
    /// Zero when every requested check passed.
    pub fn exit_code(&self) -> i32 {
        match &self.report {
            Some(r) if !self.manifest.exploratory && !r.pass => 1,
            _ => 0,
        }
    }
}

/// Parses the process arguments, runs, and maps the result to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&args) {
        Ok(outcome) => {
            if let Some(r) = &outcome.report {
                eprintln!(
                    "{}: pointwise {} (observed {:.3e}, threshold {:.3e}); averaged {} (observed {:.3e}, threshold {:.3e})",
                    r.mode.name(),
                    verdict(r.pointwise.pass),
                    r.pointwise.observed_plus_2se,
                    r.pointwise.threshold,
                    verdict(r.averaged.pass),
                    r.averaged.observed_plus_2se,
                    r.averaged.threshold,
                );
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// The configuration after flags, defaults and theorem rules are applied.
struct Resolved {
    config: RunConfig,
    experiment: ExperimentConfig,
    bound: Option<BoundMode>,
    selection: Option<Selection>,
    constants: Option<Constants>,
    exploratory: bool,
    warnings: Vec<String>,
}

fn apply_flags(cfg: &mut RunConfig, args: &Args) {
    if let Some(s) = args.seed {
        cfg.experiment.seed = s;
    }
    if let Some(m) = args.members {
        cfg.experiment.members = m;
    }
    if let Some(b) = &args.bound {
        cfg.experiment.bound = Some(b.clone());
    }
    if let Some(e) = args.epsilon {
        cfg.experiment.epsilon = Some(e);
    }
    if matches!(args.mode, Mode::Assimilate | Mode::Reference) {
        cfg.experiment.members = 1;
    }
}

fn resolve(mut cfg: RunConfig, args: &Args) -> Result<Resolved> {
    apply_flags(&mut cfg, args);
    let grid = WaveGrid::new(cfg.grid.length_m, cfg.grid.modes, TWO_THIRDS)?;
    let nu = cfg.solver.nu_m2_per_s;
    let forcing = shell_forcing(&grid, nu, cfg.forcing.grashof, cfg.forcing.seed);
    let t_spinup = cfg.solver.t_spinup_s.unwrap_or_else(|| SolverConfig::default_spinup(nu, &grid));
    cfg.solver.t_spinup_s = Some(t_spinup);
    let solver = SolverConfig { nu, forcing, dt: cfg.solver.dt_s, t_spinup, scheme: cfg.solver.scheme };
    let g = grashof(&solver);

    let bound = match &cfg.experiment.bound {
        Some(name) => Some(BoundMode::parse(name, cfg.experiment.epsilon)?),
        None => None,
    };
    if args.mode == Mode::Verify && bound.is_none() {
        return Err(Error::Config("verify mode needs a bound (--bound or experiment.bound)".into()));
    }
    let mut warnings = Vec::new();
    let constants = match (bound, cfg.constants) {
        (Some(_), None) => {
            let cal: Calibration = calibrate(&cfg.calibration.options(cfg.grid.length_m))?;
            Some(cal.constants)
        }
        (_, c) => c,
    };
    cfg.constants = constants;

    let a = &cfg.assimilation;
    let selection = match (bound, constants) {
        (Some(mode), Some(k)) => {
            let sel = select_parameters(mode, g, nu, cfg.grid.length_m, &k)?;
            let sel = if sel.degenerate { sel } else { sel.fit_to_grid(cfg.grid.modes)? };
            if sel.squares != sel.rule_squares {
                warnings.push(format!("squares per side raised from {} to {} to fit the grid", sel.rule_squares, sel.squares));
            }
            Some(sel)
        }
        _ => None,
    };
    // Values equal to the rule's (as in a resolved config) are not overrides.
    let exploratory = selection.as_ref().is_some_and(|s| {
        a.mu_per_s.is_some_and(|m| m != s.mu) || a.squares.is_some_and(|k| k != s.squares)
    });
    let pick = |explicit: Option<f64>, from: Option<f64>, what: &str| {
        explicit.or(from).ok_or_else(|| Error::Config(format!("assimilation.{what} is required without a bound mode")))
    };
    let mu = pick(a.mu_per_s, selection.as_ref().map(|s| s.mu), "mu_per_s")?;
    let squares = pick(a.squares.map(|k| k as f64), selection.as_ref().map(|s| s.squares as f64), "squares")? as usize;
    let basis = a.basis.or(selection.as_ref().map(|s| s.basis)).unwrap_or(BasisKind::Step);
    let observation = a.observation.or(selection.as_ref().map(|s| s.observation)).unwrap_or(ObservationKind::Volume);
    let refinement = a.refinement.or(selection.as_ref().map(|s| s.refinement)).unwrap_or(1);
    let cadence = a.cadence.unwrap_or(1);
    let placement = match a.node_offset_m {
        Some(d) => NodePlacement::Offset(d),
        None => NodePlacement::Centers,
    };
    cfg.assimilation.mu_per_s = Some(mu);
    cfg.assimilation.squares = Some(squares);
    cfg.assimilation.basis = Some(basis);
    cfg.assimilation.observation = Some(observation);
    cfg.assimilation.refinement = Some(refinement);
    cfg.assimilation.cadence = Some(cadence);

    let channels = 2 * (squares * refinement).pow(2);
    let noise = NoiseModel::new(cfg.noise.sigma2_m2_per_s, channels, cfg.experiment.seed)?;
    let assimilation =
        AssimilationConfig { mu, squares, basis, observation, placement, refinement, noise, cadence };
    let e = &cfg.experiment;
    let experiment = ExperimentConfig {
        solver,
        assimilation,
        members: e.members,
        t_run: e.t_run_s,
        t_avg: e.t_avg_s,
        perturbation: e.perturbation,
        record_every: e.record_every,
        seed: e.seed,
    };
    experiment.validate()?;
    // Record the selection actually used, overrides included.
    let selection = selection.map(|s| Selection { mu, squares, refinement, basis, observation, ..s });
    Ok(Resolved { config: cfg, experiment, bound, selection, constants, exploratory, warnings })
}

fn initial_truth(r: &Resolved, out: &Path, outputs: &mut Vec<String>) -> Result<(SpectralField, Option<AprioriDiagnostics>)> {
    let grid = r.experiment.solver.grid();
    if let Some(path) = &r.config.solver.initial_checkpoint {
        let cp = Checkpoint::load(Path::new(path))?;
        return Ok((cp.restore(Some(grid))?, None));
    }
    let spun = spin_up(&SpectralField::zeros(grid), &r.experiment.solver)?;
    let cp = Checkpoint::capture(&spun.state, spun.diagnostics.time, None);
    let path = out.join("truth_spinup.json");
    cp.save(&path)?;
    outputs.push(path.display().to_string());
    Ok((spun.state, Some(spun.diagnostics)))
}

#[derive(Serialize)]
struct ReferenceSummary {
    spinup: Option<AprioriDiagnostics>,
    trajectory: TrajectoryBounds,
}

/// Runs one invocation and writes its artifacts into `args.out`.
pub fn run(args: &Args) -> Result<Outcome> {
    let cfg = RunConfig::load(&args.config)?;
    std::fs::create_dir_all(&args.out)?;
    let out = args.out.as_path();
    let mut outputs = Vec::new();

    if args.mode == Mode::Calibrate {
        let cal = calibrate(&cfg.calibration.options(cfg.grid.length_m))?;
        let path = out.join("constants.json");
        write_json(&path, &cal)?;
        outputs.push(path.display().to_string());
        let manifest = RunManifest {
            config_path: args.config.display().to_string(),
            mode: args.mode,
            seed: cfg.calibration.seed,
            resolved: cfg,
            version: env!("CARGO_PKG_VERSION").to_string(),
            constants: Some(cal.constants),
            selection: None,
            exploratory: false,
            outputs,
            warnings: Vec::new(),
        };
        return Ok(Outcome { manifest, report: None });
    }

    let r = resolve(cfg, args)?;
    let mut warnings = r.warnings.clone();
    let (truth0, spinup) = initial_truth(&r, out, &mut outputs)?;
    if let Some(d) = &spinup {
        warnings.extend(d.warnings.iter().cloned());
    }
    let mut report = None;

    match args.mode {
        Mode::Reference => {
            let (log, _) = synthesize_observations(&r.experiment, &truth0)?;
            let path = out.join("observations.csv");
            log.save(&path)?;
            outputs.push(path.display().to_string());
            let window = r.experiment.t_run.min(10.0 / (r.experiment.solver.nu * r.experiment.solver.grid().lambda1()));
            let (_, trajectory) = monitor_bounds(&truth0, &r.experiment.solver, window)?;
            let path = out.join("apriori.json");
            write_json(&path, &ReferenceSummary { spinup, trajectory })?;
            outputs.push(path.display().to_string());
        }
        Mode::Assimilate | Mode::Ensemble | Mode::Verify => {
            let replayed;
            let source = match &args.replay {
                Some(path) => {
                    if args.mode != Mode::Assimilate {
                        return Err(Error::Config("--replay is only available in assimilate mode".into()));
                    }
                    replayed = ObservationLog::load(path)?;
                    Observations::Replay(&replayed)
                }
                None => Observations::Simulated { record_log: args.mode == Mode::Assimilate },
            };
            let run = run_from(&r.experiment, &truth0, source)?;
            warnings.extend(run.warnings.iter().cloned());
            let path = out.join("series.csv");
            run.series.save(&path)?;
            outputs.push(path.display().to_string());
            if let Some(log) = &run.log {
                let path = out.join("observations.csv");
                log.save(&path)?;
                outputs.push(path.display().to_string());
            }
            if let (Some(_), Some(selection), Some(constants)) = (r.bound, r.selection.clone(), r.constants) {
                let ctx = BoundContext {
                    selection,
                    constants,
                    nu: r.experiment.solver.nu,
                    length: r.config.grid.length_m,
                    grashof: grashof(&r.experiment.solver),
                    sigma2: r.experiment.assimilation.noise.sigma2,
                    t_avg: r.experiment.t_avg,
                    trace_q: run.traces.trace_q,
                    trace_ahalf_q: run.traces.trace_ahalf_q,
                    floor: r.config.experiment.floor,
                };
                let rep = evaluate_bound(&run.series, &ctx)?;
                let path = out.join("report.json");
                write_json(&path, &rep)?;
                outputs.push(path.display().to_string());
                report = Some(rep);
            }
        }
        Mode::Calibrate => unreachable!("handled above"),
    }

    let resolved_path = out.join("resolved.toml");
    std::fs::write(&resolved_path, r.config.to_toml()?)?;
    outputs.push(resolved_path.display().to_string());
    let manifest_path = out.join("manifest.json");
    outputs.push(manifest_path.display().to_string());
    let manifest = RunManifest {
        config_path: args.config.display().to_string(),
        mode: args.mode,
        seed: r.config.experiment.seed,
        resolved: r.config,
        version: env!("CARGO_PKG_VERSION").to_string(),
        constants: r.constants,
        selection: r.selection,
        exploratory: r.exploratory,
        outputs,
        warnings,
    };
    write_json(&manifest_path, &manifest)?;
    Ok(Outcome { manifest, report })
}

#[cfg(test)]
mod tests;
