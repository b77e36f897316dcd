use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::basis::{BasisKind, InterpolantBasis};
use super::observe::{observe_nodes, observe_volumes, NodePlacement};
use crate::spectral::random::{random_field, Spectrum};
use crate::spectral::{norm_sq, SpectralField, Space};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproximationMode {
    /// Volume observations, `||phi - R phi||^2 <= c1 h^2 ||phi||_{H^1}^2`.
    R1,
    /// Nodal observations at square centres,
    /// `||phi - R phi||^2 <= c1 h^2 ||phi||_{H^1}^2 + c2 h^4 ||phi||_{H^2}^2`.
    R2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApproximationEstimate {
    pub mode: ApproximationMode,
    pub trials: usize,
    /// `max ||phi - R phi||^2 / (h^2 ||phi||_{H^1}^2)`.
    pub max_ratio: f64,
    /// Least-squares fit of the relative residuals, coefficients kept
    /// non-negative.
    pub fit: [f64; 2],
    /// The fit scaled up until it bounds every sample.
    pub bound: [f64; 2],
}

/// Squared `L^2` interpolation error of `phi`.
pub fn interpolation_error(basis: &InterpolantBasis, phi: &SpectralField, mode: ApproximationMode) -> Result<f64> {
    let g = basis.grid();
    if !g.same_as(phi.grid()) {
        return Err(Error::GridMismatch(g.modes(), phi.grid().modes()));
    }
    let k = basis.per_side();
    let zeta = match mode {
        ApproximationMode::R1 => observe_volumes(phi, k)?,
        ApproximationMode::R2 => observe_nodes(phi, k, &NodePlacement::Centers)?,
    };
    if basis.kind() == BasisKind::Step && mode == ApproximationMode::R1 {
        // The step lifting of volume averages is the piecewise-constant
        // L^2 projection, so the error is a difference of squared norms.
        let h2 = basis.squares().side().powi(2);
        let coarse: f64 = zeta.values.iter().map(|v| v * v).sum::<f64>() * h2;
        return Ok((norm_sq(phi, Space::H) - coarse).max(0.0));
    }
    let lifted = basis.lift_unprojected(&zeta)?;
    let l2 = g.length().powi(2);
    let mut s = 0.0;
    for &idx in g.retained() {
        for c in 0..2 {
            s += (phi.coeffs()[c][idx] - lifted[c][idx]).norm_sqr();
        }
    }
    Ok(l2 * s)
}

/// Empirical approximation constants over `trials` random fields with
/// assorted spectral slopes and bandwidths.
pub fn verify_approximation(
    basis: &InterpolantBasis,
    mode: ApproximationMode,
    trials: usize,
    seed: u64,
) -> Result<ApproximationEstimate> {
    let g = basis.grid();
    let h = basis.squares().side();
    let k = basis.per_side() as f64;
    let cap = g.modes() as f64 / 3.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let decay = rng.random_range(0.5..3.0);
        let band = (k * 2f64.powf(rng.random_range(-1.0..2.0))).clamp(1.5, cap);
        let phi = random_field(g, Spectrum::new(decay, band), &mut rng);
        let r = interpolation_error(basis, &phi, mode)?;
        let a = h * h * norm_sq(&phi, Space::V);
        let b = h.powi(4) * norm_sq(&phi, Space::DA);
        samples.push((a, b, r));
    }
    let max_ratio = samples.iter().map(|&(a, _, r)| r / a).fold(0.0, f64::max);
    let (fit, bound) = match mode {
        ApproximationMode::R1 => ([max_ratio, 0.0], [max_ratio, 0.0]),
        ApproximationMode::R2 => {
            let fit = nonnegative_fit(&samples);
            let worst = samples
                .iter()
                .map(|&(a, b, r)| r / (fit[0] * a + fit[1] * b))
                .fold(0.0, f64::max);
            let s = worst.max(1.0);
            (fit, [s * fit[0], s * fit[1]])
        }
    };
    Ok(ApproximationEstimate { mode, trials, max_ratio, fit, bound })
}

/// Minimises `sum (c1 a/r + c2 b/r - 1)^2` over `c1, c2 >= 0`.
fn nonnegative_fit(samples: &[(f64, f64, f64)]) -> [f64; 2] {
    let (mut saa, mut sab, mut sbb, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(a, b, r) in samples {
        let (x, y) = (a / r, b / r);
        saa += x * x;
        sab += x * y;
        sbb += y * y;
        sa += x;
        sb += y;
    }
    let det = saa * sbb - sab * sab;
    if det > 0.0 {
        let c1 = (sa * sbb - sb * sab) / det;
        let c2 = (saa * sb - sab * sa) / det;
        if c1 >= 0.0 && c2 >= 0.0 {
            return [c1, c2];
        }
    }
    let only_a = [sa / saa, 0.0];
    let only_b = [0.0, sb / sbb];
    let cost = |c: [f64; 2]| {
        samples.iter().map(|&(a, b, r)| ((c[0] * a + c[1] * b) / r - 1.0).powi(2)).sum::<f64>()
    };
    if cost(only_a) <= cost(only_b) {
        only_a
    } else {
        only_b
    }
}
