use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::params::{BoundMode, Constants, Selection};
use super::series::{ErrorSeries, Quantity};
use crate::{Error, Result};

/// Fraction of the run, counted from the end, over which limsups are read.
pub const TAIL_FRACTION: f64 = 0.25;

/// Absolute tolerance used in place of a zero threshold when `sigma = 0`.
pub const DEFAULT_FLOOR: f64 = 1e-20;

/// Everything the thresholds depend on besides the series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundContext {
    pub selection: Selection,
    pub constants: Constants,
    pub nu: f64,
    pub length: f64,
    pub grashof: f64,
    pub sigma2: f64,
    pub t_avg: f64,
    /// `Tr[Q]` of the lifted noise actually simulated.
    pub trace_q: f64,
    /// `Tr[A^{1/2} Q A^{1/2}]`; absent for the step interpolant.
    pub trace_ahalf_q: Option<f64>,
    pub floor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCheck {
    pub quantity: Quantity,
    /// Largest ensemble mean over the final quarter (times `nu` for the
    /// time-averaged checks).
    pub observed: f64,
    /// The same with two standard errors added.
    pub observed_plus_2se: f64,
    pub threshold: f64,
    /// `threshold / observed_plus_2se`; above one means a pass.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c3: f64,
    pub c5: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
    pub j: f64,
    /// Upper bound `2 J` used for the auxiliary constant of the nodal proof.
    pub j_tilde: f64,
    /// `4 exp(nu lambda_1 G^2 J^2 / mu)`.
    pub c4: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremReport {
    pub mode: BoundMode,
    pub mu: f64,
    pub squares: usize,
    pub rule_squares: usize,
    pub refinement: usize,
    pub side: f64,
    pub degenerate: bool,
    pub grashof: f64,
    pub sigma2: f64,
    pub t_avg: f64,
    pub members: usize,
    pub trace_q: f64,
    pub trace_ahalf_q: Option<f64>,
    pub constants: Constants,
    pub derived: DerivedConstants,
    pub pointwise: BoundCheck,
    pub averaged: BoundCheck,
    pub floor: f64,
    pub pass: bool,
    pub warnings: Vec<String>,
}

/// The two thresholds of the selected theorem.
pub fn thresholds(ctx: &BoundContext) -> Result<[f64; 2]> {
    let k = &ctx.constants;
    let (nu, g, s2, t, l) = (ctx.nu, ctx.grashof, ctx.sigma2, ctx.t_avg, ctx.length);
    let mu = ctx.selection.mu;
    let lambda1 = (2.0 * PI / l).powi(2);
    let logg = 1.0 + (1.0 + g).ln();
    let sigma = || ctx.trace_ahalf_q.ok_or(Error::StepBasisNotInV);
    Ok(match ctx.selection.mode {
        BoundMode::Main1 => {
            let a = mu * ctx.trace_q;
            [a, (1.0 / t + mu) * a]
        }
        BoundMode::Cor1 => {
            let a = k.kappa1() * nu * g * g * s2;
            [a, (1.0 / t + k.kappa1() * nu * g * g / (l * l)) * a]
        }
        BoundMode::Cor2 { epsilon } => {
            let a = mu * s2 * l * l * epsilon;
            [a, (1.0 / t + mu) * a]
        }
        BoundMode::Main2 => {
            let big = sigma()?;
            let j = k.j(g);
            let ex = (nu * lambda1 * g * g * j * j / mu).exp();
            let avg = (8.0 * ex * (mu / t + 4.0 * j * j * (1.0 / t + nu * lambda1) * nu * lambda1 * g * g) + mu * mu) * 2.0 * big;
            [4.0 * mu * ex * big, avg]
        }
        BoundMode::Cor1Main2 => {
            let a = 4.0 * E * mu * sigma()?;
            [a, (20.0 / t + 16.0 * nu * lambda1 + mu / (2.0 * E)) * a]
        }
        BoundMode::NodCor1 => {
            let a = k.kappa3() * nu * lambda1 * g.powi(4) * logg.powi(4) * s2;
            let f = 20.0 / t + 16.0 * nu * lambda1 + k.c5() * nu * lambda1 * g * g * logg * logg / (2.0 * E);
            [a, f * a]
        }
        BoundMode::NodesOversampled { epsilon } => {
            let a = 32.0 * E * k.c * k.c3() * mu * mu / nu * s2 * l * l * epsilon;
            [a, (20.0 / t + 16.0 * nu * lambda1 + mu / (2.0 * E)) * a]
        }
    })
}

fn derived(ctx: &BoundContext) -> DerivedConstants {
    let k = &ctx.constants;
    let g = ctx.grashof;
    let lambda1 = (2.0 * PI / ctx.length).powi(2);
    let j = k.j(g);
    DerivedConstants {
        c3: k.c3(),
        c5: k.c5(),
        kappa1: k.kappa1(),
        kappa2: k.kappa2(),
        kappa3: k.kappa3(),
        kappa4: k.kappa4(),
        j,
        j_tilde: 2.0 * j,
        c4: 4.0 * (ctx.nu * lambda1 * g * g * j * j / ctx.selection.mu).exp(),
    }
}

fn check(quantity: Quantity, observed: f64, observed_plus_2se: f64, threshold: f64, floor: f64) -> BoundCheck {
    let pass = if threshold > 0.0 { observed_plus_2se <= threshold } else { observed <= floor };
    let margin = if observed_plus_2se > 0.0 { threshold / observed_plus_2se } else { f64::INFINITY };
    BoundCheck { quantity, observed, observed_plus_2se, threshold, margin, pass }
}

/// Compares the final-quarter limsups of `series` against the selected
/// theorem. A check passes when the observed value plus two standard
/// errors lies below its threshold; with zero noise the thresholds vanish
/// and the observed value must fall below `ctx.floor` instead.
pub fn evaluate_bound(series: &ErrorSeries, ctx: &BoundContext) -> Result<TheoremReport> {
    if series.is_empty() {
        return Err(Error::WindowTooShort { window: ctx.t_avg, span: 0.0 });
    }
    let [th_point, th_avg] = thresholds(ctx)?;
    let nodal = ctx.selection.mode.is_nodal();
    let (qp, qa) = if nodal { (Quantity::V2, Quantity::DA2) } else { (Quantity::H2, Quantity::V2) };

    let start = series.tail_start(TAIL_FRACTION);
    let mean = series.mean(qp);
    let se = series.standard_error(qp);
    let mut obs: f64 = 0.0;
    let mut plus: f64 = 0.0;
    for i in start..series.len() {
        obs = obs.max(mean[i]);
        plus = plus.max(mean[i] + 2.0 * se[i]);
    }

    let windows = series.window_averages(qa, ctx.t_avg)?;
    let cut = series.times[start];
    let mut aobs: f64 = 0.0;
    let mut aplus: f64 = 0.0;
    let mut any = false;
    for &(t, m, s) in &windows {
        if t >= cut {
            any = true;
            aobs = aobs.max(ctx.nu * m);
            aplus = aplus.max(ctx.nu * (m + 2.0 * s));
        }
    }
    if !any {
        let span = series.times.last().unwrap() - series.times[0];
        return Err(Error::WindowTooShort { window: ctx.t_avg, span });
    }

    let pointwise = check(qp, obs, plus, th_point, ctx.floor);
    let averaged = check(qa, aobs, aplus, th_avg, ctx.floor);
    let mut warnings = Vec::new();
    if ctx.selection.squares != ctx.selection.rule_squares {
        warnings.push(format!(
            "squares per side raised from {} to {} to fit the grid",
            ctx.selection.rule_squares, ctx.selection.squares
        ));
    }
    if ctx.selection.degenerate {
        warnings.push("sqrt(nu / (2 c mu)) >= L: the truth is a steady state".into());
    }
    Ok(TheoremReport {
        mode: ctx.selection.mode,
        mu: ctx.selection.mu,
        squares: ctx.selection.squares,
        rule_squares: ctx.selection.rule_squares,
        refinement: ctx.selection.refinement,
        side: ctx.selection.side(ctx.length),
        degenerate: ctx.selection.degenerate,
        grashof: ctx.grashof,
        sigma2: ctx.sigma2,
        t_avg: ctx.t_avg,
        members: series.members,
        trace_q: ctx.trace_q,
        trace_ahalf_q: ctx.trace_ahalf_q,
        constants: ctx.constants,
        derived: derived(ctx),
        pass: pointwise.pass && averaged.pass,
        pointwise,
        averaged,
        floor: ctx.floor,
        warnings,
    })
}
