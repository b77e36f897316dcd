use std::f64::consts::{E, PI};
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::dynamics::{shell_forcing, AssimilationConfig, Scheme, SolverConfig};
use crate::noise::NoiseModel;
use crate::observables::{BasisKind, NodePlacement, ObservationKind};
use crate::spectral::{leray_project, SpectralField, WaveGrid};
use crate::Error;

/// Golden-section minimum of `r - eta (1 + log r)` on `[1, hi]`.
fn phi_min(eta: f64) -> (f64, f64) {
    let phi = |r: f64| r - eta * (1.0 + r.ln());
    let (mut a, mut b) = (1.0, 20.0f64.max(2.0 * eta));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if phi(c) < phi(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let r = 0.5 * (a + b);
    let best = if phi(1.0) < phi(r) { 1.0 } else { r };
    (best, phi(best))
}

fn unit_constants() -> Constants {
    Constants { c_l: 1.0, c_b: 0.5, c: 4.0, c1: STEP_C1, nodal_c1: 0.2, nodal_c2: 0.09 }
}

#[test]
fn minlog_examples() {
    assert_eq!(minlog_bound(1.0).unwrap(), 0.0);
    assert_eq!(phi_min(1.0).1, 0.0);
    assert!((minlog_bound(E).unwrap() + E).abs() < 1e-15);
    let (r, v) = phi_min(E);
    assert!((r - E).abs() < 1e-6 && (v + E).abs() < 1e-8);
    assert!((minlog_bound(0.5).unwrap() - 0.346_573_590_279_972_6).abs() < 1e-12);
    let (r, v) = phi_min(0.5);
    assert_eq!(r, 1.0);
    assert!((v - 0.5).abs() < 1e-15);
    assert!(matches!(minlog_bound(0.0), Err(Error::InvalidArgument(_))));
    assert!(minlog_bound(-1.0).is_err());
}

proptest! {
    #[test]
    fn minlog_is_a_lower_bound(eta in 1e-6f64..10.0) {
        let (_, v) = phi_min(eta);
        let b = minlog_bound(eta).unwrap();
        prop_assert!(v >= b - 1e-9);
        if eta >= 1.0 {
            prop_assert!((v - b).abs() < 1e-6);
        }
    }

    #[test]
    fn refinement_brackets_inverse_epsilon(eps in 1e-3f64..=1.0) {
        let q = refinement_for(eps).unwrap() as f64;
        prop_assert!(q * q >= 1.0 / eps);
        prop_assert!((q - 1.0).powi(2) < 1.0 / eps);
    }
}

#[test]
fn cor1_rule() {
    let s = select_parameters(BoundMode::Cor1, 4.0, 1.0, 2.0 * PI, &unit_constants()).unwrap();
    assert!((s.mu - 64.0).abs() < 1e-12);
    // sqrt(1 / (2 (1/6) 64)) = sqrt(3/64)
    assert!((s.max_side - (3.0f64 / 64.0).sqrt()).abs() < 1e-14);
    assert_eq!(s.squares, 30);
    assert!(2.0 * PI / 30.0 <= s.max_side && 2.0 * PI / 29.0 > s.max_side);
    assert!(!s.degenerate);
    assert_eq!((s.basis, s.observation, s.refinement), (BasisKind::Step, ObservationKind::Volume, 1));
}

#[test]
fn refinement_examples() {
    assert_eq!(refinement_for(0.1).unwrap(), 4);
    assert_eq!(refinement_for(1.0).unwrap(), 1);
    assert_eq!(refinement_for(0.25).unwrap(), 2);
    assert_eq!(refinement_for(0.0625).unwrap(), 4);
    assert!(refinement_for(0.0).is_err());
    assert!(refinement_for(1.5).is_err());
    let s = select_parameters(BoundMode::Cor2 { epsilon: 0.1 }, 4.0, 1.0, 2.0 * PI, &unit_constants()).unwrap();
    assert_eq!((s.squares, s.refinement, s.fine_squares()), (30, 4, 120));
}

#[test]
fn nodal_rules() {
    let k = unit_constants();
    let (g, nu, l) = (3.0, 0.1, 2.0 * PI);
    let logg = 1.0 + (1.0f64 + g).ln();
    let j = 2.0 * k.c_b * (2.0 + (2.0 * k.c_b * k.c.sqrt()).ln()) * logg;
    assert!((k.j(g) - j).abs() < 1e-14);
    assert!((k.c3() - 0.3).abs() < 1e-15);
    let s = select_parameters(BoundMode::Main2, g, nu, l, &k).unwrap();
    assert!((s.mu - 2.0 * nu * g * j).abs() < 1e-14);
    assert_eq!((s.basis, s.observation), (BasisKind::Mollified, ObservationKind::Nodal));
    let s = select_parameters(BoundMode::Cor1Main2, g, nu, l, &k).unwrap();
    // mu = nu lambda_1 G^2 J^2 with lambda_1 = 1.
    assert!((s.mu - nu * g * g * j * j).abs() < 1e-13);
    assert!(s.max_side.powi(2) * 2.0 * k.c3() * s.mu <= nu * (1.0 + 1e-12));
    let s = select_parameters(BoundMode::NodesOversampled { epsilon: 0.25 }, g, nu, l, &k).unwrap();
    assert_eq!(s.refinement, 2);
}

#[test]
fn degenerate_selection() {
    let s = select_parameters(BoundMode::Cor1, 0.01, 1.0, 2.0 * PI, &unit_constants()).unwrap();
    assert!(s.degenerate);
    assert_eq!(s.squares, 1);
    assert!(select_parameters(BoundMode::Cor1, 0.0, 1.0, 1.0, &unit_constants()).is_err());
}

#[test]
fn fitting_to_the_grid_only_refines() {
    let s = select_parameters(BoundMode::Cor1, 4.0, 1.0, 2.0 * PI, &unit_constants()).unwrap();
    let f = s.fit_to_grid(128).unwrap();
    assert_eq!((f.squares, f.rule_squares), (32, 30));
    assert!(f.side(2.0 * PI) <= s.max_side);
    let mut over = s.clone();
    over.refinement = 4;
    over.squares = 17;
    assert_eq!(over.fit_to_grid(128).unwrap().squares, 32);
    over.squares = 33;
    assert!(over.fit_to_grid(128).is_err());
}

fn context(mode: BoundMode, squares: usize, sigma2: f64) -> BoundContext {
    let k = unit_constants();
    let mut selection = select_parameters(mode, 2.0, 0.1, 2.0 * PI, &k).unwrap();
    selection.squares = squares;
    BoundContext {
        selection,
        constants: k,
        nu: 0.1,
        length: 2.0 * PI,
        grashof: 2.0,
        sigma2,
        t_avg: 1.0,
        trace_q: 0.3,
        trace_ahalf_q: Some(2.0),
        floor: DEFAULT_FLOOR,
    }
}

#[test]
fn threshold_scaling() {
    let a = thresholds(&context(BoundMode::Cor1, 8, 1e-3)).unwrap();
    let b = thresholds(&context(BoundMode::Cor1, 32, 1e-3)).unwrap();
    assert_eq!(a, b);
    let e1 = thresholds(&context(BoundMode::Cor2 { epsilon: 0.5 }, 8, 1e-3)).unwrap();
    let e2 = thresholds(&context(BoundMode::Cor2 { epsilon: 0.25 }, 8, 1e-3)).unwrap();
    assert!((e1[0] / e2[0] - 2.0).abs() < 1e-12 && (e1[1] / e2[1] - 2.0).abs() < 1e-12);
    let ctx = context(BoundMode::Cor1, 8, 1e-3);
    let mu = ctx.selection.mu;
    // The corollary's bound dominates the theorem's with Tr[Q] <= sigma^2 L^2.
    let cor1 = thresholds(&ctx).unwrap();
    let main1 = mu * 1e-3 * 4.0 * PI * PI;
    assert!((cor1[0] - main1).abs() < 1e-12 * main1);
    let c1m2 = thresholds(&context(BoundMode::Cor1Main2, 8, 1e-3)).unwrap();
    let mu = context(BoundMode::Cor1Main2, 8, 1e-3).selection.mu;
    assert!((c1m2[0] - 4.0 * E * mu * 2.0).abs() < 1e-12 * c1m2[0]);
    let mut step = context(BoundMode::Cor1Main2, 8, 1e-3);
    step.trace_ahalf_q = None;
    assert!(matches!(thresholds(&step), Err(Error::StepBasisNotInV)));
}

#[test]
fn series_statistics() {
    let mut s = ErrorSeries::new(3);
    s.push(0.0, &[[1.0, 2.0, 3.0], [3.0, 2.0, 3.0], [2.0, 2.0, 6.0]]).unwrap();
    assert_eq!(s.mean(Quantity::H2), &[2.0]);
    assert!((s.standard_error(Quantity::H2)[0] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(s.standard_error(Quantity::V2)[0], 0.0);
    assert!(s.push(1.0, &[[0.0; 3]]).is_err());
}

#[test]
fn window_averages_of_linear_data() {
    let mut s = ErrorSeries::new(1);
    for i in 0..=40 {
        let t = 0.25 * i as f64;
        s.push(t, &[[t, 1.0, 2.0 * t]]).unwrap();
    }
    let w = s.window_averages(Quantity::H2, 2.0).unwrap();
    assert_eq!(w.first().unwrap().0, 2.0);
    for &(t, m, _) in &w {
        assert!((m - (t - 1.0)).abs() < 1e-12);
    }
    // A window that is not a multiple of the spacing.
    for &(t, m, _) in &s.window_averages(Quantity::DA2, 1.1).unwrap() {
        assert!((m - (2.0 * t - 1.1)).abs() < 1e-12);
    }
    assert!(matches!(s.window_averages(Quantity::V2, 11.0), Err(Error::WindowTooShort { .. })));
    assert_eq!(s.tail_start(0.25), 30);
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("t,mean_H2,se_H2,mean_V2,se_V2,mean_DA2,se_DA2\n"));
    assert_eq!(text.lines().count(), 42);
}

#[test]
fn zero_noise_bound_uses_the_floor() {
    let mut s = ErrorSeries::new(2);
    for i in 0..=20 {
        s.push(i as f64 * 0.1, &[[1e-25; 3], [1e-25; 3]]).unwrap();
    }
    let mut ctx = context(BoundMode::Main1, 8, 0.0);
    ctx.trace_q = 0.0;
    let r = evaluate_bound(&s, &ctx).unwrap();
    assert_eq!(r.pointwise.threshold, 0.0);
    assert!(r.pass);
    ctx.floor = 1e-30;
    assert!(!evaluate_bound(&s, &ctx).unwrap().pass);
    ctx.t_avg = 5.0;
    assert!(matches!(evaluate_bound(&s, &ctx), Err(Error::WindowTooShort { .. })));
}

#[test]
fn sine_mode_ladyzhenskaya_ratio() {
    let g = WaveGrid::with_default_dealiasing(2.0 * PI, 32).unwrap();
    // u = (cos x_2, 0): |u|^2 = ||u||^2 = 2 pi^2 and ||u||_{L4}^4 = 3 pi^2 / 2.
    let mut raw = [vec![Complex64::new(0.0, 0.0); g.len()], vec![Complex64::new(0.0, 0.0); g.len()]];
    raw[0][g.flat_index([0, 1])] = Complex64::new(0.5, 0.0);
    raw[0][g.flat_index([0, -1])] = Complex64::new(0.5, 0.0);
    let u = leray_project(&g, raw);
    let [lady, bg] = inequality_ratios(&u).unwrap();
    let exact = 1.5f64.sqrt() * PI / (2.0 * PI * PI);
    assert!((lady - exact).abs() < 1e-12);
    // |Au|^2 = lambda_1 ||u||^2, so the log term vanishes: 1 / (pi sqrt 2).
    assert!((bg - 1.0 / (PI * 2f64.sqrt())).abs() < 1e-12);
    let cal = calibrate(&CalibrationOptions {
        modes: 32,
        trials: 400,
        partition_resolution: 160,
        approximation_trials: 40,
        ..Default::default()
    })
    .unwrap();
    assert!(cal.ladyzhenskaya_max >= lady && cal.constants.c_l >= SAFETY * lady);
    assert!(cal.brezis_gallouet_max >= bg);
    assert!(cal.constants.c1 >= STEP_C1 && cal.step_r1_max <= STEP_C1);
    assert!(cal.constants.c > 1.0 && cal.constants.nodal_c1 > 0.0);
}

fn small_experiment(members: usize, sigma2: f64, perturbation: f64) -> (ExperimentConfig, SpectralField) {
    let g = WaveGrid::with_default_dealiasing(2.0 * PI, 32).unwrap();
    let nu = 0.05;
    let forcing = shell_forcing(&g, nu, 20.0, 11);
    let solver = SolverConfig { nu, forcing, dt: 0.02, t_spinup: 20.0, scheme: Scheme::Etd1 };
    let k = 8;
    let assimilation = AssimilationConfig {
        mu: 5.0,
        squares: k,
        basis: BasisKind::Step,
        observation: ObservationKind::Volume,
        placement: NodePlacement::Centers,
        refinement: 1,
        noise: NoiseModel::new(sigma2, 2 * k * k, 5).unwrap(),
        cadence: 1,
    };
    let cfg = ExperimentConfig { solver, assimilation, members, t_run: 2.0, t_avg: 0.5, perturbation, record_every: 5, seed: 9 };
    let spun = crate::dynamics::spin_up(&SpectralField::zeros(&g), &cfg.solver).unwrap();
    (cfg, spun.state)
}

#[test]
fn synchronized_noise_free_member_stays_at_zero() {
    let (cfg, u0) = small_experiment(1, 0.0, 0.0);
    let run = run_from(&cfg, &u0, Observations::Simulated { record_log: false }).unwrap();
    assert!(run.series.mean(Quantity::H2).iter().all(|&e| e < 1e-26));
    assert_eq!(run.series.len(), 21);
    assert!((run.series.times.last().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn statistics_do_not_depend_on_the_schedule() {
    let (cfg, u0) = small_experiment(4, 1e-3, 1.0);
    let a = run_from(&cfg, &u0, Observations::Simulated { record_log: false }).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_from(&cfg, &u0, Observations::Simulated { record_log: false })).unwrap();
    for q in [Quantity::H2, Quantity::V2, Quantity::DA2] {
        assert_eq!(a.series.mean(q), b.series.mean(q));
        assert_eq!(a.series.standard_error(q), b.series.standard_error(q));
    }
}

#[test]
fn ensemble_size_and_noise_effects() {
    let (cfg, u0) = small_experiment(8, 2e-3, 1.0);
    let small = run_from(&cfg, &u0, Observations::Simulated { record_log: false }).unwrap();
    let mut big_cfg = cfg.clone();
    big_cfg.members = 16;
    let big = run_from(&big_cfg, &u0, Observations::Simulated { record_log: false }).unwrap();
    let last = small.series.len() - 1;
    let (ms, mb) = (small.series.mean(Quantity::H2)[last], big.series.mean(Quantity::H2)[last]);
    let se = small.series.standard_error(Quantity::H2)[last].hypot(big.series.standard_error(Quantity::H2)[last]);
    assert!((ms - mb).abs() <= 3.0 * se, "{ms} vs {mb}, se {se}");

    let mut quiet = cfg.clone();
    quiet.assimilation.noise.sigma2 = 0.0;
    let q = run_from(&quiet, &u0, Observations::Simulated { record_log: false }).unwrap();
    let mq = q.series.mean(Quantity::H2)[last];
    assert!(ms + 3.0 * small.series.standard_error(Quantity::H2)[last] > mq, "{ms} vs noise-free {mq}");
}

#[test]
fn replay_reproduces_the_series() {
    let (cfg, u0) = small_experiment(1, 1e-3, 0.5);
    let a = run_from(&cfg, &u0, Observations::Simulated { record_log: true }).unwrap();
    let log = a.log.clone().unwrap();
    let mut bytes = Vec::new();
    log.write_to(&mut bytes).unwrap();
    let log = crate::observables::ObservationLog::read_from(bytes.as_slice()).unwrap();
    let b = run_from(&cfg, &u0, Observations::Replay(&log)).unwrap();
    assert!(a.series.max_relative_difference(&b.series).unwrap() <= 1e-12);

    let mut two = cfg.clone();
    two.members = 2;
    assert!(run_from(&two, &u0, Observations::Replay(&log)).is_err());
    let mut faster = cfg.clone();
    faster.solver.dt = 0.01;
    assert!(matches!(run_from(&faster, &u0, Observations::Replay(&log)), Err(Error::ObservationLog(_))));
}

#[test]
fn config_validation() {
    let (mut cfg, _) = small_experiment(1, 0.0, 0.0);
    cfg.t_avg = 3.0;
    assert!(cfg.validate().is_err());
    cfg.t_avg = 0.5;
    cfg.members = 0;
    assert!(cfg.validate().is_err());
    let _ = Arc::strong_count(cfg.solver.grid());
}
