use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::observables::{BasisKind, ObservationKind};
use crate::{Error, Result};

/// Inequality and approximation constants entering the parameter rules and
/// the error thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    /// Ladyzhenskaya: `||u||_{L^4}^2 <= C_L |u|_H ||u||_V`.
    pub c_l: f64,
    /// Brezis-Gallouet: `||v||_inf <= C_B ||v||_V (1 + log(|Av|^2 / (lambda_1 ||v||^2)))`.
    pub c_b: f64,
    /// Mollified partition constant (gradient and Gram bounds).
    pub c: f64,
    /// First approximation constant of the volume interpolant.
    pub c1: f64,
    /// Approximation constants of the nodal interpolant.
    pub nodal_c1: f64,
    pub nodal_c2: f64,
}

/// Volume-element approximation constant for the step interpolant.
pub const STEP_C1: f64 = 1.0 / 6.0;

impl Constants {
    /// `c_3 = max(c_1, sqrt(c_2))` for the nodal interpolant.
    pub fn c3(&self) -> f64 {
        self.nodal_c1.max(self.nodal_c2.sqrt())
    }

    /// `2 + log(2 C_B sqrt(c))`.
    fn log_factor(&self) -> f64 {
        2.0 + (2.0 * self.c_b * self.c.sqrt()).ln()
    }

    /// `c_5 = 4 C_B^2 (2 + log 2 C_B c^{1/2})^2`.
    pub fn c5(&self) -> f64 {
        4.0 * self.c_b * self.c_b * self.log_factor().powi(2)
    }

    pub fn kappa1(&self) -> f64 {
        16.0 * PI * PI * self.c_l * self.c_l
    }

    pub fn kappa2(&self) -> f64 {
        32.0 * PI * PI * self.c1 * self.c_l * self.c_l
    }

    pub fn kappa3(&self) -> f64 {
        128.0 * PI * PI * E * self.c * self.c3() * self.c5().powi(2)
    }

    pub fn kappa4(&self) -> f64 {
        32.0 * PI * PI * self.c3() * self.c_b * self.c_b * self.log_factor().powi(2)
    }

    /// `J = 2 C_B (2 + log 2 C_B c^{1/2}) (1 + log(1 + G))`.
    pub fn j(&self, g: f64) -> f64 {
        2.0 * self.c_b * self.log_factor() * (1.0 + (1.0 + g).ln())
    }
}

/// `-eta log eta`, the lower bound of `min_{r >= 1} r - eta (1 + log r)`.
pub fn minlog_bound(eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    Ok(-eta * eta.ln())
}

/// Which theorem's parameter rule and error bound a run follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BoundMode {
    Main1,
    Cor1,
    Cor2 { epsilon: f64 },
    Main2,
    #[serde(rename = "cor1main2")]
    Cor1Main2,
    #[serde(rename = "nodcor1")]
    NodCor1,
    NodesOversampled { epsilon: f64 },
}

impl BoundMode {
    pub fn parse(name: &str, epsilon: Option<f64>) -> Result<Self> {
        let need_eps = || {
            let e = epsilon.ok_or_else(|| Error::Config(format!("bound mode {name} needs an epsilon")))?;
            check_epsilon(e)?;
            Ok::<f64, Error>(e)
        };
        Ok(match name {
            "main1" => BoundMode::Main1,
            "cor1" => BoundMode::Cor1,
            "cor2" => BoundMode::Cor2 { epsilon: need_eps()? },
            "main2" => BoundMode::Main2,
            "cor1main2" => BoundMode::Cor1Main2,
            "nodcor1" => BoundMode::NodCor1,
            "nodes-oversampled" => BoundMode::NodesOversampled { epsilon: need_eps()? },
            other => return Err(Error::Config(format!("unknown bound mode `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundMode::Main1 => "main1",
            BoundMode::Cor1 => "cor1",
            BoundMode::Cor2 { .. } => "cor2",
            BoundMode::Main2 => "main2",
            BoundMode::Cor1Main2 => "cor1main2",
            BoundMode::NodCor1 => "nodcor1",
            BoundMode::NodesOversampled { .. } => "nodes-oversampled",
        }
    }

    /// Volume modes bound `|v|_H^2`; nodal modes bound `||v||_V^2`.
    pub fn is_nodal(&self) -> bool {
        matches!(self, BoundMode::Main2 | BoundMode::Cor1Main2 | BoundMode::NodCor1 | BoundMode::NodesOversampled { .. })
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            BoundMode::Cor2 { epsilon } | BoundMode::NodesOversampled { epsilon } => Some(*epsilon),
            _ => None,
        }
    }

    pub fn basis(&self) -> BasisKind {
        if self.is_nodal() {
            BasisKind::Mollified
        } else {
            BasisKind::Step
        }
    }

    pub fn observation(&self) -> ObservationKind {
        if self.is_nodal() {
            ObservationKind::Nodal
        } else {
            ObservationKind::Volume
        }
    }
}

/// `epsilon = 1` is accepted as the limiting case without oversampling.
fn check_epsilon(e: f64) -> Result<()> {
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1], got {e}")));
    }
    Ok(())
}

/// Smallest `q` with `q^2 >= 1 / epsilon`, so that `q^2 >= 1/eps > (q-1)^2`.
pub fn refinement_for(epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    let target = 1.0 / epsilon;
    let mut q = target.sqrt().floor().max(1.0) as usize;
    while ((q * q) as f64) < target {
        q += 1;
    }
    while q > 1 && (((q - 1) * (q - 1)) as f64) >= target {
        q -= 1;
    }
    Ok(q)
}

/// Smallest `K` with `L / K <= bound`.
fn smallest_admissible(length: f64, bound: f64) -> usize {
    let mut k = (length / bound).ceil().max(1.0) as usize;
    while k > 1 && length / (k - 1) as f64 <= bound {
        k -= 1;
    }
    while length / k as f64 > bound {
        k += 1;
    }
    k
}

/// Parameters prescribed by a theorem, before and after fitting to a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Selection {
    pub mode: BoundMode,
    pub mu: f64,
    /// `sqrt(nu / (2 c mu))`, the largest admissible square side.
    pub max_side: f64,
    /// Squares per side of the lifting partition, `h' = L / K`.
    pub squares: usize,
    /// Oversampling factor; observations use `q K` squares per side.
    pub refinement: usize,
    /// Squares per side the rule produced before any grid fitting.
    pub rule_squares: usize,
    /// Whether `sqrt(nu / (2 c mu)) >= L`: the truth is a steady state and
    /// no data are needed.
    pub degenerate: bool,
    pub basis: BasisKind,
    pub observation: ObservationKind,
}

impl Selection {
    pub fn side(&self, length: f64) -> f64 {
        length / self.squares as f64
    }

    pub fn fine_squares(&self) -> usize {
        self.squares * self.refinement
    }

    /// Moves `K` up to the smallest admissible value for which `K` and
    /// `q K` divide the grid resolution. A larger `K` only shrinks `h`, so
    /// every sufficient condition on `h` still holds.
    pub fn fit_to_grid(&self, modes: usize) -> Result<Selection> {
        let mut k = self.squares;
        while k <= modes {
            if modes.is_multiple_of(k) && modes.is_multiple_of(k * self.refinement) {
                return Ok(Selection { squares: k, ..self.clone() });
            }
            k += 1;
        }
        Err(Error::Config(format!(
            "no partition with at least {} squares per side (refinement {}) fits a {modes}-point grid",
            self.squares, self.refinement
        )))
    }
}

/// The parameter rule of each theorem: `mu` at equality in its hypothesis
/// and the largest admissible `h = L / K`.
pub fn select_parameters(mode: BoundMode, g: f64, nu: f64, length: f64, k: &Constants) -> Result<Selection> {
    if !(g > 0.0 && nu > 0.0 && length > 0.0) {
        return Err(Error::InvalidArgument(format!("need G, nu, L > 0, got G = {g}, nu = {nu}, L = {length}")));
    }
    let lambda1 = (2.0 * PI / length).powi(2);
    let logg = 1.0 + (1.0 + g).ln();
    let (mu, c) = match mode {
        BoundMode::Main1 | BoundMode::Cor1 | BoundMode::Cor2 { .. } => {
            (4.0 * k.c_l * k.c_l * nu * lambda1 * g * g, k.c1)
        }
        BoundMode::Main2 => (2.0 * nu * lambda1 * g * k.j(g), k.c3()),
        BoundMode::Cor1Main2 | BoundMode::NodCor1 | BoundMode::NodesOversampled { .. } => {
            (k.c5() * nu * lambda1 * g * g * logg * logg, k.c3())
        }
    };
    let max_side = (nu / (2.0 * c * mu)).sqrt();
    let degenerate = max_side >= length;
    let refinement = match mode.epsilon() {
        Some(e) => refinement_for(e)?,
        None => 1,
    };
    let squares = if degenerate { 1 } else { smallest_admissible(length, max_side) };
    Ok(Selection {
        mode,
        mu,
        max_side,
        squares,
        refinement,
        rule_squares: squares,
        degenerate,
        basis: mode.basis(),
        observation: mode.observation(),
    })
}
