use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{GridSpec, SpectralField, WaveGrid};
use crate::{Error, Result};

/// Position in the counter-based noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamPosition {
    pub seed: u64,
    pub member: u64,
    pub step: u64,
}

/// Textual dump of a state: grid metadata, time, coefficients of both
/// components as `[re, im]` pairs in grid order, and the noise position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub grid: GridSpec,
    pub time: f64,
    pub stream: Option<StreamPosition>,
    pub coefficients: [Vec<[f64; 2]>; 2],
}

impl Checkpoint {
    pub fn capture(u: &SpectralField, time: f64, stream: Option<StreamPosition>) -> Self {
        let coefficients = [0, 1].map(|c| u.coeffs()[c].iter().map(|z| [z.re, z.im]).collect());
        Self { grid: u.grid().spec(), time, stream, coefficients }
    }

    /// Rebuilds the state; reuses `grid` when it matches the metadata.
    pub fn restore(&self, grid: Option<&Arc<WaveGrid>>) -> Result<SpectralField> {
        let g = match grid {
            Some(g) if g.spec() == self.grid => g.clone(),
            Some(g) => return Err(Error::GridMismatch(g.modes(), self.grid.modes)),
            None => WaveGrid::new(self.grid.length, self.grid.modes, self.grid.dealias_fraction)?,
        };
        let coeffs = [0, 1].map(|c| self.coefficients[c].iter().map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>());
        let u = SpectralField::from_modes(&g, coeffs)?;
        if u.divergence_residual() > 1e-10 * crate::spectral::norm(&u, crate::spectral::Space::H).max(1.0) {
            return Err(Error::InvalidArgument("checkpoint state is not divergence-free".into()));
        }
        Ok(u)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}
