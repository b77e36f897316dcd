use std::path::Path;

use super::{main_with_args, run, Args, Mode, RunConfig};

const SMALL: &str = r#"
[grid]
modes = 32

[solver]
nu_m2_per_s = 0.05
dt_s = 0.02
t_spinup_s = 5.0

[forcing]
grashof = 5.0
seed = 2

[assimilation]
mu_per_s = 5.0
squares = 8

[noise]
sigma2_m2_per_s = 1e-3

[experiment]
t_run_s = 2.0
t_avg_s = 0.5
record_every = 5
seed = 4
"#;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn args(config: &Path, out: &Path, mode: Mode) -> Args {
    Args { config: config.into(), mode, seed: None, members: None, out: out.into(), bound: None, epsilon: None, replay: None }
}

#[test]
fn malformed_config_reports_the_line() {
    let bad = SMALL.replace("dt_s = 0.02", "dt_s = \"fast\"");
    let err = RunConfig::parse(&bad).unwrap_err().to_string();
    assert!(err.contains("line 7"), "{err}");
    let unknown = SMALL.replace("seed = 2", "seed = 2\nphase = 1");
    let err = RunConfig::parse(&unknown).unwrap_err().to_string();
    assert!(err.contains("phase") && err.contains("line 13"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &bad);
    let out = dir.path().join("out");
    let code = main_with_args(["nudge", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn calibrate_writes_constants_only() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[calibration]\nmodes = 32\ntrials = 60\npartition_resolution = 160\napproximation_trials = 10\n");
    let cfg = write(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    let o = run(&args(&cfg, &out, Mode::Calibrate)).unwrap();
    assert_eq!(o.exit_code(), 0);
    let files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, vec![std::ffi::OsString::from("constants.json")]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("constants.json")).unwrap()).unwrap();
    assert!(v["constants"]["c_l"].as_f64().unwrap() > 0.19);
}

#[test]
fn replay_matches_the_synthesized_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.toml", SMALL);
    let refdir = dir.path().join("ref");
    run(&args(&cfg, &refdir, Mode::Reference)).unwrap();
    assert!(refdir.join("observations.csv").exists() && refdir.join("apriori.json").exists());

    let direct = dir.path().join("direct");
    run(&args(&cfg, &direct, Mode::Assimilate)).unwrap();
    let replay = dir.path().join("replay");
    let mut a = args(&cfg, &replay, Mode::Assimilate);
    a.replay = Some(refdir.join("observations.csv"));
    run(&a).unwrap();

    let read = |p: &Path| -> Vec<Vec<f64>> {
        let mut r = csv::Reader::from_path(p.join("series.csv")).unwrap();
        r.records().map(|x| x.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect()
    };
    let (x, y) = (read(&direct), read(&replay));
    assert_eq!(x.len(), y.len());
    for (rx, ry) in x.iter().zip(&y) {
        for (u, v) in rx.iter().zip(ry) {
            assert!((u - v).abs() <= 1e-12 * u.abs().max(v.abs()).max(1e-300), "{u} vs {v}");
        }
    }
    // A log recorded at another time step is rejected.
    let faster = write(dir.path(), "f.toml", &SMALL.replace("dt_s = 0.02", "dt_s = 0.01"));
    let mut a = args(&faster, &dir.path().join("bad"), Mode::Assimilate);
    a.replay = Some(refdir.join("observations.csv"));
    assert!(run(&a).is_err());
}

#[test]
fn bound_run_and_resolved_config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("mu_per_s = 5.0\nsquares = 8\n", "")
        + "\n[constants]\nc_l = 0.22\nc_b = 0.27\nc = 31.0\nc1 = 0.16666666666666666\nnodal_c1 = 0.08\nnodal_c2 = 0.0\n";
    let cfg = write(dir.path(), "b.toml", &text);
    let out = dir.path().join("first");
    let mut a = args(&cfg, &out, Mode::Verify);
    a.bound = Some("cor1".into());
    a.members = Some(4);
    let first = run(&a).unwrap();
    let report = first.report.clone().unwrap();
    assert!(!first.manifest.exploratory);
    assert_eq!(first.exit_code(), if report.pass { 0 } else { 1 });
    for f in ["manifest.json", "series.csv", "report.json", "resolved.toml", "truth_spinup.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let resolved = out.join("resolved.toml");
    let again = dir.path().join("second");
    let second = run(&args(&resolved, &again, Mode::Verify)).unwrap();
    assert!(!second.manifest.exploratory);
    assert_eq!(std::fs::read(out.join("series.csv")).unwrap(), std::fs::read(again.join("series.csv")).unwrap());
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), std::fs::read(again.join("report.json")).unwrap());

    let missing = write(dir.path(), "m.toml", &SMALL.replace("mu_per_s = 5.0\n", ""));
    assert!(run(&args(&missing, &dir.path().join("m"), Mode::Ensemble)).is_err());
    assert!(run(&args(&write(dir.path(), "v.toml", SMALL), &dir.path().join("v"), Mode::Verify)).is_err());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
