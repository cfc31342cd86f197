use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspkahler"))
        .args(args)
        .env_remove("CUSPKAHLER_THREADS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn topology_reference_value() {
    let out = run(&["topology", "--n", "2", "--epsilon", "1/10", "--c1", "0", "--vol", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["report"]["s_sol"], "-400/9999");
    for key in ["n", "epsilon", "s_sol", "s_divisor", "a"] {
        assert!(r["report"].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn check_sfk_default_case() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["check-sfk", "--n", "2", "--k", "1", "--beta", "0", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["report"]["max_residual"].as_f64().unwrap() <= 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("sfk.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("tau,rho,momentum,oracle"));
    // 200 grid points, 8 seeded spot checks and the header
    assert_eq!(csv.lines().count(), 209);
}

#[test]
fn empty_grid_is_usage_error() {
    let out = run(&["check-sfk", "--grid", "1e-2:1e2:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty grid"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["glue", "--model", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["indicial", "--delta", "1"]).status.code(), Some(2));
    assert_eq!(run(&["topology", "--epsilon", "a/b"]).status.code(), Some(2));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_cuspkahler"))
        .args(["spectrum"])
        .env("CUSPKAHLER_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn fixed_seed_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let d = dir.path().to_str().unwrap();
        let out = run(&[
            "check-sfk",
            "--n",
            "3",
            "--k",
            "2",
            "--beta",
            "0.5",
            "--seed",
            "42",
            "--out",
            d,
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["sfk.csv", "sfk.json", "checks.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let single = Command::new(env!("CARGO_BIN_EXE_cuspkahler"))
        .args(["check-sfk", "--n", "3", "--k", "2", "--beta", "0.5", "--seed", "42"])
        .env("CUSPKAHLER_THREADS", "1")
        .output()
        .unwrap();
    let multi = run(&["check-sfk", "--n", "3", "--k", "2", "--beta", "0.5", "--seed", "42"]);
    assert_eq!(single.stdout, multi.stdout);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "spectrum", "n": 3, "j_max": 4}"#).unwrap();
    let out = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["report"]["spectrum"]["n"], 5);
    assert_eq!(r["report"]["spectrum"]["entries"].as_array().unwrap().len(), 5);

    std::fs::write(&cfg, r#"{"command": "glue"}"#).unwrap();
    assert_eq!(
        run(&["spectrum", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn asymptotics_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "asymptotics",
        "--n",
        "3",
        "--k",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let fits = read_json(&dir.path().join("asymptotics.json"));
    let fits = fits.as_array().unwrap();
    assert_eq!(fits.len(), 2);
    for f in fits {
        for key in ["n", "k", "end", "exponent", "coefficient", "r2", "window"] {
            assert!(f.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(fits[0]["end"], "ae");
    assert!((fits[1]["coefficient"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-2 / 3.0);
}

#[test]
fn indicial_and_spectrum_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run(&["indicial", "--n", "2", "--out", d]).status.code(), Some(0));
    assert_eq!(run(&["spectrum", "--n", "2", "--out", d]).status.code(), Some(0));
    let ind = std::fs::read_to_string(dir.path().join("indicial.csv")).unwrap();
    assert!(ind.starts_with("j,lambda_e,mu_e,multiplicity,roots,kappa_running_min\n"));
    assert_eq!(ind.lines().count(), 8);
    let spec = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spec.lines().nth(2).unwrap().starts_with("1,2,3,0"));
    let idx = read_json(&dir.path().join("indicial.json"));
    assert_eq!(idx["index"]["index"], -2);
}

#[test]
fn glue_reports_monotonicity_failure_honestly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["glue", "--n", "3", "--out", dir.path().to_str().unwrap()]);
    let rows = read_json(&dir.path().join("glue.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        for key in ["epsilon", "n", "k", "min_margin", "sup_deviation"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert!(r["min_margin"].as_f64().unwrap() > 0.0);
    }
    let decreasing = rows
        .windows(2)
        .all(|w| w[1]["sup_deviation"].as_f64().unwrap() < w[0]["sup_deviation"].as_f64().unwrap());
    assert_eq!(out.status.code(), Some(if decreasing { 0 } else { 1 }));
    assert!(dir.path().join("glue_sweep.csv").exists());
}

#[test]
fn biharmonic_exterior_degree_zero() {
    let out = run(&[
        "biharmonic",
        "--n",
        "3",
        "--side",
        "exterior",
        "--h",
        "0:1,2:0.5",
        "--k",
        "2:1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let modes = r["report"]["solution"]["modes"].as_array().unwrap();
    let zero = modes.iter().find(|m| m["degree"] == 0).unwrap();
    let powers: Vec<i64> = zero["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t[0].as_i64().unwrap())
        .collect();
    assert_eq!(powers, vec![-4, -2]);
    let nonzero_mean = run(&["biharmonic", "--n", "3", "--side", "exterior", "--k", "0:1"]);
    assert_eq!(nonzero_mean.status.code(), Some(2));
}

#[test]
fn profile_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "profile",
        "--n",
        "2",
        "--k",
        "1",
        "--beta",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let p = read_json(&dir.path().join("profile.json"));
    assert_eq!(p["quotient"], "2*tau");
    assert_eq!(p["remainder"], "0");
}
