//! Time integration of the reference and nudged equations.

mod checkpoint;
mod config;
mod spinup;
mod stepper;

pub use checkpoint::{Checkpoint, StreamPosition};
pub use config::{grashof, shell_forcing, AssimilationConfig, Scheme, SolverConfig};
pub use spinup::{monitor_bounds, spin_up, AprioriDiagnostics, SpinUp, TrajectoryBounds, CFL_LIMIT};
pub use stepper::{cfl_number, step_nudged, step_reference, Stepper};

#[cfg(test)]
mod tests;
