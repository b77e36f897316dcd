use thiserror::Error;

/// Errors raised by the assimilation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fields live on different grids ({0} vs {1} modes per side)")]
    GridMismatch(usize, usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{squares} squares per side do not divide the {modes}-point grid; choose a resolution that is a multiple of {squares}")]
    SquaresDoNotDivideGrid { squares: usize, modes: usize },
    #[error("node {index} at ({x:.6}, {y:.6}) lies outside its square")]
    NodeOutsideSquare { index: usize, x: f64, y: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("refinement {q} does not divide {squares} squares per side")]
    RefinementMismatch { q: usize, squares: usize },
    #[error("trace[A^(1/2) Q A^(1/2)] is infinite for the step basis (its elements are not in H^1)")]
    StepBasisNotInV,
    #[error("non-finite state at t = {time}")]
    BlowUp { time: f64 },
    #[error("ensemble member {member} blew up at t = {time}")]
    MemberBlowUp { member: usize, time: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("averaging window {window} exceeds the recorded span {span}")]
    WindowTooShort { window: f64, span: f64 },
    #[error("observation log: {0}")]
    ObservationLog(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
