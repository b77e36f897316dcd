use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::noise::NoiseModel;
use crate::observables::{build_basis, BasisKind, NodePlacement, ObservationKind};
use crate::spectral::random::{random_field, with_h_norm, Spectrum};
use crate::spectral::{leray_project, norm, norm_sq, SpectralField, Space, WaveGrid};

fn grid(m: usize) -> Arc<WaveGrid> {
    WaveGrid::with_default_dealiasing(2.0 * PI, m).unwrap()
}

fn solver(g: &Arc<WaveGrid>, nu: f64, forcing: SpectralField, dt: f64) -> SolverConfig {
    assert!(Arc::ptr_eq(forcing.grid(), g));
    SolverConfig { nu, forcing, dt, t_spinup: 1.0, scheme: Scheme::Etd1 }
}

/// `sin(j . x) e` for a unit vector `e` orthogonal to `j`.
fn eigenmode(g: &Arc<WaveGrid>, j: [i64; 2]) -> SpectralField {
    let mut raw = [vec![Complex64::new(0.0, 0.0); g.len()], vec![Complex64::new(0.0, 0.0); g.len()]];
    let n = ((j[0] * j[0] + j[1] * j[1]) as f64).sqrt();
    let e = [-(j[1] as f64) / n, j[0] as f64 / n];
    for c in 0..2 {
        raw[c][g.flat_index(j)] = Complex64::new(0.0, -0.5 * e[c]);
        raw[c][g.flat_index([-j[0], -j[1]])] = Complex64::new(0.0, 0.5 * e[c]);
    }
    leray_project(g, raw)
}

#[test]
fn grashof_examples() {
    let g = grid(16);
    let zero = solver(&g, 1.0, SpectralField::zeros(&g), 0.1);
    assert_eq!(grashof(&zero), 0.0);
    let f = shell_forcing(&g, 1.0, 5.0, 3);
    assert!((norm(&f, Space::H) - 5.0).abs() < 1e-12);
    let cfg = solver(&g, 1.0, f.clone(), 0.1);
    assert!((grashof(&cfg) - 5.0).abs() < 1e-12);
    let doubled = solver(&g, 2.0, f, 0.1);
    assert!((grashof(&doubled) - 5.0 / 4.0).abs() < 1e-12);
    let f = shell_forcing(&g, 0.01, 10.0, 4);
    assert!((grashof(&solver(&g, 0.01, f.clone(), 0.1)) - 10.0).abs() < 1e-10);
    assert!(f.divergence_residual() < 1e-14);
    for &idx in g.retained() {
        let ksq = g.ksq(idx);
        if !(1.0..=4.0).contains(&ksq) {
            assert_eq!(f.mode(idx), [Complex64::new(0.0, 0.0); 2]);
        }
    }
}

#[test]
fn unforced_energy_decays() {
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut u = with_h_norm(random_field(&g, Spectrum::new(1.0, 8.0), &mut rng), 0.2);
    let st = Stepper::new(&solver(&g, 0.05, SpectralField::zeros(&g), 0.01)).unwrap();
    let mut e = norm_sq(&u, Space::H);
    for s in 0..100 {
        u = st.reference(&u, s as f64 * 0.01).unwrap();
        let next = norm_sq(&u, Space::H);
        assert!(next < e);
        e = next;
        assert!(u.divergence_residual() < 1e-12);
        assert_eq!(u.coeffs()[0][0], Complex64::new(0.0, 0.0));
    }
}

#[test]
fn forced_eigenmode_is_a_fixed_point() {
    let g = grid(32);
    let phi = eigenmode(&g, [2, 1]);
    let nu = 0.1;
    let lam = 5.0;
    let f = &phi * (nu * lam);
    for scheme in [Scheme::Etd1, Scheme::Etd2rk] {
        let cfg = SolverConfig { scheme, ..solver(&g, nu, f.clone(), 0.05) };
        let st = Stepper::new(&cfg).unwrap();
        let mut u = phi.clone();
        for s in 0..200 {
            u = st.reference(&u, s as f64 * 0.05).unwrap();
        }
        assert!(norm(&(&u - &phi), Space::H) < 1e-10 * norm(&phi, Space::H));
    }
}

#[test]
fn energy_balance_residual_is_first_order() {
    let g = grid(32);
    let f = shell_forcing(&g, 0.05, 20.0, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u0 = with_h_norm(random_field(&g, Spectrum::new(2.0, 6.0), &mut rng), 0.5);
    let residual = |dt: f64| {
        let cfg = solver(&g, 0.05, f.clone(), dt);
        let u1 = step_reference(&u0, &cfg).unwrap();
        let lhs = (norm_sq(&u1, Space::H) - norm_sq(&u0, Space::H)) / dt + 2.0 * 0.05 * norm_sq(&u0, Space::V);
        let rhs = 2.0 * f.inner(&u0);
        (lhs - rhs).abs()
    };
    let (r1, r2) = (residual(0.01), residual(0.005));
    assert!(r1 < 0.05 * 2.0 * 0.05 * norm_sq(&u0, Space::V));
    let ratio = r1 / r2;
    assert!(ratio > 1.5 && ratio < 2.5, "residual ratio {ratio}");
}

#[test]
fn halving_dt_is_first_order() {
    let g = grid(32);
    let f = shell_forcing(&g, 0.05, 20.0, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u0 = with_h_norm(random_field(&g, Spectrum::new(2.0, 6.0), &mut rng), 0.5);
    let run = |dt: f64, scheme: Scheme| {
        let cfg = SolverConfig { scheme, ..solver(&g, 0.05, f.clone(), dt) };
        let st = Stepper::new(&cfg).unwrap();
        let mut u = u0.clone();
        for s in 0..(1.0 / dt).round() as usize {
            u = st.reference(&u, s as f64 * dt).unwrap();
        }
        u
    };
    let fine = run(0.00125, Scheme::Etd2rk);
    let e1 = norm(&(&run(0.02, Scheme::Etd1) - &fine), Space::H);
    let e2 = norm(&(&run(0.01, Scheme::Etd1) - &fine), Space::H);
    let ratio = e1 / e2;
    assert!(ratio > 2.0 / 3.0 * 2.0 && ratio < 3.0 * 2.0, "ratio {ratio}");
    let r1 = norm(&(&run(0.02, Scheme::Etd2rk) - &fine), Space::H);
    assert!(r1 < e1);
}

fn assimilation(g: &Arc<WaveGrid>, k: usize, mu: f64, sigma2: f64) -> AssimilationConfig {
    let _ = g;
    AssimilationConfig {
        mu,
        squares: k,
        basis: BasisKind::Step,
        observation: ObservationKind::Volume,
        placement: NodePlacement::Centers,
        refinement: 1,
        noise: NoiseModel::new(sigma2, 2 * k * k, 1).unwrap(),
        cadence: 1,
    }
}

#[test]
fn synchronized_start_stays_synchronized() {
    let g = grid(32);
    let f = shell_forcing(&g, 0.05, 30.0, 9);
    let cfg = solver(&g, 0.05, f, 0.02);
    let acfg = assimilation(&g, 8, 2.0, 0.0);
    acfg.validate(&cfg).unwrap();
    let basis = build_basis(BasisKind::Step, 8, &g).unwrap();
    let st = Stepper::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut big = with_h_norm(random_field(&g, Spectrum::new(2.0, 6.0), &mut rng), 0.3);
    let mut small = big.clone();
    for s in 0..200 {
        let t = s as f64 * 0.02;
        let y = acfg.observe(&big).unwrap();
        small = st.nudged(&small, &y, &acfg, &basis, t).unwrap();
        big = st.reference(&big, t).unwrap();
        assert_eq!(small.max_abs_diff(&big), 0.0);
    }
}

#[test]
fn nudging_contracts_and_control_does_not() {
    let g = grid(32);
    let nu = 0.02;
    let f = shell_forcing(&g, nu, 200.0, 10);
    let cfg = solver(&g, nu, f, 0.01);
    let st = Stepper::new(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut truth = random_field(&g, Spectrum::new(2.0, 6.0), &mut rng);
    for s in 0..2000 {
        truth = st.reference(&truth, s as f64 * 0.01).unwrap();
    }
    let start = with_h_norm(random_field(&g, Spectrum::new(2.0, 6.0), &mut rng), norm(&truth, Space::H));
    let acfg = assimilation(&g, 16, 10.0, 0.0);
    let basis = build_basis(BasisKind::Step, 16, &g).unwrap();
    let (mut u, mut w, mut tr) = (start.clone(), start, truth);
    let e0 = norm_sq(&(&u - &tr), Space::H);
    for s in 0..1000 {
        let t = s as f64 * 0.01;
        let y = acfg.observe(&tr).unwrap();
        u = st.nudged(&u, &y, &acfg, &basis, t).unwrap();
        w = st.reference(&w, t).unwrap();
        tr = st.reference(&tr, t).unwrap();
    }
    let nudged = norm_sq(&(&u - &tr), Space::H);
    let control = norm_sq(&(&w - &tr), Space::H);
    // Rate at least mu / 4 over ten time units.
    assert!(nudged < e0 * (-10.0 * 10.0 / 4.0f64).exp(), "nudged error {nudged} from {e0}");
    assert!(control > 1e-3 * e0, "control error {control} from {e0}");
}

#[test]
fn nudged_step_is_deterministic_and_validated() {
    let g = grid(16);
    let f = shell_forcing(&g, 0.1, 10.0, 11);
    let cfg = solver(&g, 0.1, f, 0.1);
    let acfg = assimilation(&g, 4, 4.0, 0.0);
    assert!(acfg.validate(&cfg).is_ok());
    let too_fast = AssimilationConfig { mu: 6.0, ..acfg.clone() };
    assert!(matches!(too_fast.validate(&cfg), Err(crate::Error::Config(_))));
    let bad_k = assimilation(&g, 3, 1.0, 0.0);
    assert!(bad_k.validate(&cfg).is_err());
    let basis = build_basis(BasisKind::Step, 4, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_field(&g, Spectrum::new(1.0, 5.0), &mut rng);
    let y = acfg.observe(&random_field(&g, Spectrum::new(1.0, 5.0), &mut rng)).unwrap();
    let a = step_nudged(&u, &y, &cfg, &acfg, &basis).unwrap();
    let b = step_nudged(&u, &y, &cfg, &acfg, &basis).unwrap();
    assert_eq!(a.max_abs_diff(&b), 0.0);
}

#[test]
fn blow_up_is_reported_with_time() {
    let g = grid(16);
    let cfg = solver(&g, 0.1, SpectralField::zeros(&g), 0.1);
    let st = Stepper::new(&cfg).unwrap();
    let mut raw = [vec![Complex64::new(0.0, 0.0); g.len()], vec![Complex64::new(0.0, 0.0); g.len()]];
    raw[1][g.flat_index([1, 0])] = Complex64::new(f64::NAN, 0.0);
    let bad = SpectralField::from_modes(&g, raw).unwrap();
    match st.reference(&bad, 2.0) {
        Err(crate::Error::BlowUp { time }) => assert!((time - 2.1).abs() < 1e-12),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn spin_up_respects_a_priori_bounds() {
    let g = grid(32);
    let nu = 0.05;
    let f = shell_forcing(&g, nu, 20.0, 12);
    let cfg = SolverConfig { t_spinup: SolverConfig::default_spinup(nu, &g), ..solver(&g, nu, f, 0.05) };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u0 = with_h_norm(random_field(&g, Spectrum::new(2.0, 6.0), &mut rng), 0.1);
    let s = spin_up(&u0, &cfg).unwrap();
    assert!(s.diagnostics.within_bounds(), "{:?}", s.diagnostics);
    assert!(s.diagnostics.max_cfl < CFL_LIMIT);
    let (_, rec) = monitor_bounds(&s.state, &cfg, 10.0 / nu).unwrap();
    assert!(rec.pass(), "{rec:?}");
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_field(&g, Spectrum::new(1.0, 5.0), &mut rng);
    let pos = StreamPosition { seed: 3, member: 1, step: 77 };
    let cp = Checkpoint::capture(&u, 1.0 / 3.0, Some(pos));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    cp.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    assert_eq!(back, cp);
    assert_eq!(back.restore(Some(&g)).unwrap().max_abs_diff(&u), 0.0);
    assert_eq!(back.restore(None).unwrap().max_abs_diff(&u), 0.0);
    assert!(back.restore(Some(&grid(32))).is_err());
}
