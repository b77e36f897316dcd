use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Scheme;
use crate::harness::{CalibrationOptions, Constants, DEFAULT_FLOOR};
use crate::observables::{BasisKind, ObservationKind};
use crate::{Error, Result};

/// Run configuration as read from TOML. Keys carry their units; `sigma2`
/// has units of velocity squared times time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub solver: SolverSection,
    pub forcing: ForcingSection,
    #[serde(default)]
    pub assimilation: AssimilationSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    /// Supplied constants; calibrated when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
    #[serde(default)]
    pub calibration: CalibrationSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_length")]
    pub length_m: f64,
    pub modes: usize,
}

fn default_length() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub nu_m2_per_s: f64,
    pub dt_s: f64,
    /// Defaults to `20 / (nu lambda_1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_spinup_s: Option<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    /// Start the truth from this checkpoint instead of spinning up.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_checkpoint: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    pub grashof: f64,
    #[serde(default = "one")]
    pub seed: u64,
}

fn one() -> u64 {
    1
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssimilationSection {
    /// Overrides the theorem's rate; with a bound mode this makes the run
    /// exploratory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squares: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cadence: Option<usize>,
    /// Uniform offset of the nodes from each square's lower-left corner;
    /// centres when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_offset_m: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub sigma2_m2_per_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "one_usize")]
    pub members: usize,
    #[serde(default = "default_run")]
    pub t_run_s: f64,
    #[serde(default = "default_avg")]
    pub t_avg_s: f64,
    #[serde(default = "unit")]
    pub perturbation: f64,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    #[serde(default = "one")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_run() -> f64 {
    10.0
}
fn default_avg() -> f64 {
    1.0
}
fn unit() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            members: 1,
            t_run_s: default_run(),
            t_avg_s: default_avg(),
            perturbation: 1.0,
            record_every: 1,
            seed: 1,
            bound: None,
            epsilon: None,
            floor: DEFAULT_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default = "cal_modes")]
    pub modes: usize,
    #[serde(default = "cal_trials")]
    pub trials: usize,
    #[serde(default = "cal_seed")]
    pub seed: u64,
    #[serde(default = "cal_squares")]
    pub partition_squares: usize,
    #[serde(default = "cal_resolution")]
    pub partition_resolution: usize,
    #[serde(default = "cal_approx")]
    pub approximation_trials: usize,
}

fn cal_modes() -> usize {
    CalibrationOptions::default().modes
}
fn cal_trials() -> usize {
    CalibrationOptions::default().trials
}
fn cal_seed() -> u64 {
    CalibrationOptions::default().seed
}
fn cal_squares() -> usize {
    CalibrationOptions::default().partition_squares
}
fn cal_resolution() -> usize {
    CalibrationOptions::default().partition_resolution
}
fn cal_approx() -> usize {
    CalibrationOptions::default().approximation_trials
}

impl Default for CalibrationSection {
    fn default() -> Self {
        let d = CalibrationOptions::default();
        Self {
            modes: d.modes,
            trials: d.trials,
            seed: d.seed,
            partition_squares: d.partition_squares,
            partition_resolution: d.partition_resolution,
            approximation_trials: d.approximation_trials,
        }
    }
}

impl CalibrationSection {
    pub fn options(&self, length: f64) -> CalibrationOptions {
        CalibrationOptions {
            modes: self.modes,
            length,
            trials: self.trials,
            seed: self.seed,
            partition_squares: self.partition_squares,
            partition_resolution: self.partition_resolution,
            approximation_trials: self.approximation_trials,
            approximation_squares: CalibrationOptions::default().approximation_squares,
        }
    }
}

impl RunConfig {
    /// Parses TOML; errors carry the line and column of the offending key.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
