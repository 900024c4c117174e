use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use extrapolab::io::write_function;
use extrapolab_core::{CellBox, Grid, GridFunction, Weight};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_extrapolab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn save(dir: &Path, name: &str, f: &GridFunction) -> String {
    let path = dir.join(name);
    write_function(fs::File::create(&path).unwrap(), f).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn r_above_p_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"schema_version":1,"suite":"endpoint","seed":1,"grid":{"dim":1,"levels":[8]},
            "params":{"p":[2.0,2.0],"r":[3.0,1.0,1.0]}}"#,
    );
    let out = run(&["--config", &cfg, "--out", dir.path().to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("r_i <= p_i"), "{err}");
    assert!(!dir.path().join("endpoint.csv").exists());
}

#[test]
fn unknown_suite_exits_2() {
    let out = run(&["verify", "no_such_suite"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "x.json", r#"{"schema_version":1,"suite":"identity","grid":{"dim":1,"levels":[6]}}"#);
    assert_eq!(run(&["--config", &cfg, "run"]).status.code(), Some(2));
    assert_eq!(run(&["run"]).status.code(), Some(2));
}

#[test]
fn constant_of_all_ones_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 6).unwrap();
    let w = save(dir.path(), "w.txt", Weight::ones(g).as_function());
    let weights = format!("{w},{w}");
    for args in [
        vec!["constant", "--kind", "a1", "--weights", &w],
        vec!["constant", "--kind", "apvec", "--weights", &weights, "--p", "2,3"],
        vec!["constant", "--kind", "apr", "--weights", &weights, "--p", "2,2"],
        vec!["constant", "--kind", "apr-r1", "--weights", &weights, "--p", "1,2"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{v}");
    }
    let out = run(&["constant", "--kind", "apr", "--weights", &weights, "--p", "2,2", "--r", "3,1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_i <= p_i"));
}

#[test]
fn verify_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["--out", d, "--threads", "2", "verify", "identity"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("identity.csv")).unwrap();
    assert!(csv.starts_with("suite,case_id,resolution,lhs,rhs,constant,witness,pass\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("identity.summary.json")).unwrap()).unwrap();
    let keys: Vec<&str> = summary.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    for k in ["suite", "cases", "max_constant", "min_constant", "stability_factor", "pass"] {
        assert!(keys.contains(&k), "{keys:?}");
    }
    assert_eq!(summary["pass"], true);
}

#[test]
fn identical_configs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = run(&["--out", dir.path().to_str().unwrap(), "--threads", threads, "verify", "mmax"]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(a.path().join("mmax.csv")).unwrap(), fs::read(b.path().join("mmax.csv")).unwrap());
    let c = tempfile::tempdir().unwrap();
    run(&["--out", c.path().to_str().unwrap(), "--seed-override", "7", "verify", "mmax"]);
    assert_ne!(fs::read(a.path().join("mmax.csv")).unwrap(), fs::read(c.path().join("mmax.csv")).unwrap());
}

#[test]
fn failing_golden_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value =
        serde_json::from_str(include_str!("../configs/sawyer.json")).unwrap();
    cfg["goldens"]["max_ratio-L10"] = serde_json::json!(0.5);
    let path = write_config(dir.path(), "s.json", &cfg.to_string());
    let out = run(&["--config", &path, "--out", dir.path().to_str().unwrap(), "run"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_merges_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for s in ["identity", "exponents"] {
        assert_eq!(run(&["--out", d, "verify", s]).status.code(), Some(0));
    }
    let a = dir.path().join("identity.csv");
    let b = dir.path().join("exponents.csv");
    let out = run(&["report", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let suites: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["exponents", "identity"]);
    // constants are residuals over the 1e-12 tolerance
    assert!(v[0]["max_constant"].as_f64().unwrap() <= 1.0);
    assert_eq!(v[1]["pass"], true);
}

#[test]
fn norm_maximal_and_construct() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(1, 6).unwrap();
    let chi = GridFunction::indicator(g, &CellBox { lo: [0, 0], hi: [16, 1] }, 1.0).unwrap();
    let f = save(dir.path(), "chi.txt", &chi);

    // ‖χ_E‖_{L^{p,q}} = |E|^{1/p}
    let out = run(&["norm", &f, "--p", "2", "--q", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let m = dir.path().join("m.txt");
    let out = run(&["maximal", &f, "--dyadic", "--output", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mf = extrapolab::io::read_function(std::io::BufReader::new(fs::File::open(&m).unwrap())).unwrap();
    assert!(mf.values()[..16].iter().all(|&x| x == 1.0));
    assert_eq!(mf.values()[40], 0.25);

    let w = dir.path().join("w.txt");
    let spec = r#"{"kind":"power","exponent":-0.5}"#;
    let out = run(&["construct", "--kind", "generate", "--spec", spec, "--level", "6", "--output", w.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["constant", "--kind", "a1", "--weights", w.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 1.0);

    let one = save(dir.path(), "one.txt", Weight::ones(g).as_function());
    let out = run(&["construct", "--kind", "hat-ar", "--u1", &one, "--g", &f, "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = extrapolab::io::read_function(out.stdout.as_slice()).unwrap();
    assert!(v.values().iter().all(|&x| x > 0.0 && x.is_finite()));
}
