//! Ensemble experiments, parameter rules and the error bounds they are
//! checked against.

mod bounds;
mod calibrate;
mod ensemble;
mod params;
mod series;

pub use bounds::{evaluate_bound, thresholds, BoundCheck, BoundContext, DerivedConstants, TheoremReport, DEFAULT_FLOOR, TAIL_FRACTION};
pub use calibrate::{calibrate, localized, inequality_ratios, Calibration, CalibrationOptions, PartitionSummary, SAFETY};
pub use ensemble::{run_ensemble, run_from, synthesize_observations, EnsembleRun, ExperimentConfig, Observations};
pub use params::{minlog_bound, refinement_for, select_parameters, BoundMode, Constants, Selection, STEP_C1};
pub use series::{ErrorSeries, Quantity};

#[cfg(test)]
mod tests;
