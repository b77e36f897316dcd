//! Brownian measurement errors, their lift to a Q-Wiener process in `H`,
//! covariance traces and the auxiliary Ornstein-Uhlenbeck process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::observables::{BasisKind, InterpolantBasis, ObservationKind, ObservationVector};
use crate::spectral::SpectralField;
use crate::{Error, Result};

/// Independent Brownian channels `b_d` with `E b_d(t)^2 = t sigma^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Intensity `sigma^2`, velocity^2 x time.
    pub sigma2: f64,
    pub channels: usize,
    pub seed: u64,
}

/// Generator for one `(member, step)` coordinate. The ChaCha key is the
/// seed and member; the step selects the stream. Draws are therefore
/// independent of how members are scheduled.
pub fn stream(seed: u64, member: u64, step: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&member.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(step);
    rng
}

impl NoiseModel {
    pub fn new(sigma2: f64, channels: usize, seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!("noise intensity must be finite and >= 0, got {sigma2}")));
        }
        Ok(Self { sigma2, channels, seed })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Brownian increments over one step of length `dt`.
    pub fn increments(&self, dt: f64, member: u64, step: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.channels];
        self.fill_increments(dt, member, step, &mut out);
        out
    }

    pub fn fill_increments(&self, dt: f64, member: u64, step: u64, out: &mut [f64]) {
        if self.sigma2 == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let sd = (0.5 * self.sigma2 * dt).sqrt();
        let mut rng = stream(self.seed, member, step);
        for v in out.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = sd * z;
        }
    }
}

/// Free-function form of [`NoiseModel::increments`].
pub fn sample_increments(dt: f64, model: &NoiseModel, member: u64, step: u64) -> Vec<f64> {
    model.increments(dt, member, step)
}

/// `sum_d dbeta_d gamma_d`.
pub fn lift_increment(dbeta: &[f64], basis: &InterpolantBasis) -> Result<SpectralField> {
    let zeta = ObservationVector::from_values(dbeta.to_vec(), basis.per_side(), ObservationKind::Volume)?;
    basis.interpolate(&zeta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerStats {
    /// `(sigma^2 / 2) sum_d |gamma_d|_H^2`.
    pub trace_q: f64,
    /// `(sigma^2 / 2) sum_d ||gamma_d||_V^2`; absent for the step basis,
    /// whose functions are not in `H^1`.
    pub trace_ahalf_q: Option<f64>,
    pub basis_kind: BasisKind,
}

pub fn covariance_traces(basis: &InterpolantBasis, sigma2: f64) -> WienerStats {
    let trace_q = 0.5 * sigma2 * basis.gamma_norm_sum(|_| 1.0);
    let trace_ahalf_q = match basis.kind() {
        BasisKind::Step => None,
        BasisKind::Mollified => Some(0.5 * sigma2 * basis.gamma_norm_sum(|k| k)),
    };
    WienerStats { trace_q, trace_ahalf_q, basis_kind: basis.kind() }
}

/// `trace[A^{1/2} Q A^{1/2}]`, defined only for the mollified basis.
pub fn trace_ahalf_q(basis: &InterpolantBasis, sigma2: f64) -> Result<f64> {
    covariance_traces(basis, sigma2).trace_ahalf_q.ok_or(Error::StepBasisNotInV)
}

/// Advances `dz + nu A z dt = mu dW` exactly in each Fourier mode, given the
/// Wiener increment `dw` over `[t, t + dt]`:
/// `z' = e^{-nu |k|^2 dt} z + mu sqrt((1 - e^{-2 nu |k|^2 dt}) / (2 nu |k|^2 dt)) dw`.
pub fn ou_step(z: &SpectralField, dt: f64, nu: f64, mu: f64, dw: &SpectralField) -> Result<SpectralField> {
    z.check_grid(dw)?;
    let g = z.grid().clone();
    let mut out = z.clone();
    let c = out.coeffs_mut();
    for &idx in g.retained() {
        let a = nu * g.ksq(idx) * dt;
        let decay = (-a).exp();
        let gain = mu * (-(-2.0 * a).exp_m1() / (2.0 * a)).sqrt();
        for comp in 0..2 {
            c[comp][idx] = decay * c[comp][idx] + gain * dw.coeffs()[comp][idx];
        }
    }
    Ok(out)
}
