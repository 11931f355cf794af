//! End-to-end checks of the binary: exit codes, file artifacts, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paravolt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2), "unknown subcommand: {}", stderr(&out));
    let out = run(&["lift", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2), "unknown flag: {}", stderr(&out));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn decompose_prints_blocks_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    let spec = paravolt_core::GridSpec::new(512, 2.0).unwrap();
    let f = paravolt_core::GridFunction::from_fn(spec, |x| (8.0 * x).sin() + 0.3 * (20.0 * x).cos());
    f.write_csv(&input).unwrap();
    let out = run(&["decompose", "--input", input.to_str().unwrap(), "--p", "2", "--fit"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("j,block_lp_norm,weighted"), "{text}");
    assert!(text.contains("total,"), "{text}");
    assert!(text.contains("fitted_alpha,"), "{text}");
}

fn lift_args(dir: &Path, seed: &str) -> Vec<String> {
    [
        "lift",
        "--noise",
        "bm",
        "--kernel",
        "frac:r=0.9,T=0.25",
        "--seed",
        seed,
        "--levels",
        "3",
        "--n",
        "1024",
        "--coeffs",
        "256",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([dir.join("lift.csv").to_str().unwrap().to_string()])
    .collect()
}

#[test]
fn lift_artifacts_and_bit_identical_rerun() {
    let da = tempfile::tempdir().unwrap();
    let db = tempfile::tempdir().unwrap();
    for d in [da.path(), db.path()] {
        let args = lift_args(d, "42");
        let out = bin().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    for name in ["lift.csv", "diagnostics.csv"] {
        let a = std::fs::read(da.path().join(name)).unwrap();
        let b = std::fs::read(db.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
    let manifest = std::fs::read_to_string(da.path().join("lift.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 42"), "{manifest}");
    let diag = std::fs::read_to_string(da.path().join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("n,m_n,cauchy_norm"), "{diag}");
    assert!(diag.lines().count() >= 3, "{diag}");
}

#[test]
fn lift_seed_env_overrides_flag() {
    let da = tempfile::tempdir().unwrap();
    let db = tempfile::tempdir().unwrap();
    let out = bin().args(lift_args(da.path(), "42")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = bin()
        .args(lift_args(db.path(), "42"))
        .env("PARAVOLT_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let a = std::fs::read(da.path().join("lift.csv")).unwrap();
    let b = std::fs::read(db.path().join("lift.csv")).unwrap();
    assert_ne!(a, b, "PARAVOLT_SEED was ignored");
    let manifest = std::fs::read_to_string(db.path().join("lift.csv.manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 7"), "{manifest}");
}

fn write_config(path: &PathBuf, body: &str) {
    std::fs::write(path, body).unwrap();
}

#[test]
fn solve_young_matches_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write_config(
        &cfg,
        r#"{
            "grid": {"n": 2048, "l": 2.0},
            "kernels": {"phi1": "step:T=0.5"},
            "sigma": {"kind": "linear", "epsilon": 0.5},
            "noise": "clock:T=1.0",
            "u0": {"constant": 1.0},
            "exponents": {"beta1": 1.0, "beta2": 1.0, "p": 2.0},
            "tol": 1e-10,
            "max_iter": 200
        }"#,
    );
    let sol = dir.path().join("solution.csv");
    let rep = dir.path().join("report.json");
    let out = run(&[
        "solve",
        "--mode",
        "young",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["converged"], serde_json::Value::Bool(true));

    let text = std::fs::read_to_string(&sol).unwrap();
    assert!(text.starts_with("t,u"), "{}", &text[..20.min(text.len())]);
    let mut checked = 0;
    for line in text.lines().skip(1) {
        let (t, u) = line.split_once(',').unwrap();
        let t: f64 = t.parse().unwrap();
        let u: f64 = u.parse().unwrap();
        if t > 0.1 && t < 0.5 {
            let exact = (0.5 * t).exp();
            assert!((u - exact).abs() / exact < 1e-3, "u({t}) = {u} vs {exact}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn solve_rough_on_band_limited_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("problem.json");
    write_config(
        &cfg,
        r#"{
            "grid": {"n": 1024, "l": 2.0},
            "kernels": {"phi1": "frac:r=0.9,T=0.25", "phi2": "step:T=0.25"},
            "sigma": {"kind": "rational", "epsilon": 0.3},
            "sigma2": {"kind": "tanh", "epsilon": 0.15},
            "noise": "smooth:alpha=-0.2",
            "u0": {"constant": 0.8},
            "exponents": {"beta1": 0.8, "beta2": 1.0, "p": 2.0},
            "tol": 1e-9,
            "max_iter": 150,
            "seed": 11
        }"#,
    );
    let sol = dir.path().join("solution.csv");
    let out = run(&[
        "solve",
        "--mode",
        "rough",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(sol.exists());
    assert!(dir.path().join("solution.csv.manifest.json").exists());
}

#[test]
fn empty_config_lists_all_missing_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    write_config(&cfg, "{}");
    let out = run(&[
        "solve",
        "--mode",
        "young",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    for field in ["grid", "kernels", "sigma", "noise", "u0", "exponents", "tol", "max_iter"] {
        assert!(err.contains(field), "missing-field report lacks `{field}`: {err}");
    }
}

#[test]
fn model_fractional_rejects_shallow_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "model",
        "--name",
        "fractional",
        "--params",
        "r=0.8,n=512",
        "--out",
        dir.path().join("run.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("5/6"), "{}", stderr(&out));
}

#[test]
fn model_levy_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("run.csv");
    let out = run(&[
        "model",
        "--name",
        "levy",
        "--params",
        "n=1024",
        "--seed",
        "5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(std::fs::read_to_string(&out_path).unwrap().starts_with("t,u"));
    let manifest =
        std::fs::read_to_string(dir.path().join("run.csv.manifest.json")).unwrap();
    assert!(manifest.contains("alpha_target"), "{manifest}");
}

#[test]
fn probe_counterexample_is_jobs_invariant() {
    let run_with = |jobs: &str| {
        let out = run(&[
            "probe",
            "--experiment",
            "counterexample",
            "--seeds",
            "4",
            "--jobs",
            jobs,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    let a = run_with("1");
    let b = run_with("3");
    assert_eq!(a, b, "probe output depends on --jobs");
    assert!(a.contains("median,"), "{a}");
}
