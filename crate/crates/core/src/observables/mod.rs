//! Observation operators on a square partition of the box and the liftings
//! that turn observation vectors back into velocity fields.

mod approximation;
mod basis;
mod log;
mod mollifier;
mod observe;
mod partition;
mod vector;

pub use approximation::{interpolation_error, verify_approximation, ApproximationEstimate, ApproximationMode};
pub use basis::{build_basis, BasisKind, InterpolantBasis, MOLLIFIED_POINTS_PER_SIDE, MOLLIFIER_FRACTION};
pub use log::{LogWriter, ObservationLog};
pub use mollifier::Mollifier;
pub use observe::{observe_nodes, observe_volumes, oversample_average, NodePlacement};
pub use partition::{DiscRule, Entry, PartitionOfUnity, PartitionReport};
pub use vector::{ObservationKind, ObservationVector, Squares};
