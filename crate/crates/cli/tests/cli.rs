//! End-to-end runs of the `ethweyl` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ethweyl_cli::plot::emit_plot_script;
use ethweyl_cli::{ExperimentConfig, CONFIG_SCHEMA};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ethweyl"))
}

fn run_in(dir: &Path, args: &[&str], workers: &str) -> Output {
    bin().current_dir(dir).env("ETHWEYL_WORKERS", workers).arg("run").args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_COMPARE: &str = r#"{
  "kind": "semiclassical-compare",
  "model": {"omega": 14},
  "seed": 11,
  "compare_omega_max": 2.0,
  "predictor": {"n_zb": 24, "curve": {"angles": 24}}
}"#;

#[test]
fn weyl_symbol_of_qpqp() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), &["--kind", "weyl-symbol", "--out", "w"], "1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&tmp.path().join("w/symbol.json"));
    let mut terms: Vec<(u64, f64, f64)> = rep["symbol"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["hbar"].as_u64().unwrap(), t["re"].as_f64().unwrap(), t["im"].as_f64().unwrap()))
        .collect();
    terms.sort_by_key(|a| a.0);
    // q²p² + iħqp
    assert_eq!(terms, vec![(0, 1.0, 0.0), (1, 0.0, 1.0)]);
    let m = json(&tmp.path().join("w/manifest.json"));
    assert_eq!(m["success"], Value::Bool(true));
    assert_eq!(m["schema_version"], 1);
}

#[test]
fn reruns_are_byte_identical_and_thread_independent() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.json"), SMALL_COMPARE).unwrap();
    for (dir, workers) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let out = run_in(tmp.path(), &["--config", "c.json", "--out", dir], workers);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["profile.csv", "semiclassical.csv", "summary.json", "compare.gp"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(tmp.path().join("c").join(f)).unwrap(), "{f} with two workers");
    }
    let (ma, mc) = (json(&tmp.path().join("a/manifest.json")), json(&tmp.path().join("c/manifest.json")));
    // The output directory is part of the config, so the hashes differ only through it.
    assert_ne!(ma["config_hash"], mc["config_hash"]);
    assert_eq!(ma["config"]["predictor"]["seed"], 11);
}

#[test]
fn manifest_is_enough_to_rerun() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("c.json"), SMALL_COMPARE).unwrap();
    assert!(run_in(tmp.path(), &["--config", "c.json", "--out", "first"], "1").status.success());
    let m = json(&tmp.path().join("first/manifest.json"));
    let mut cfg: ExperimentConfig = serde_json::from_value(m["config"].clone()).unwrap();
    cfg.out = "second".into();
    fs::write(tmp.path().join("again.json"), serde_json::to_string(&cfg).unwrap()).unwrap();
    assert!(run_in(tmp.path(), &["--config", "again.json"], "1").status.success());
    for f in ["profile.csv", "semiclassical.csv"] {
        assert_eq!(fs::read(tmp.path().join("first").join(f)).unwrap(), fs::read(tmp.path().join("second").join(f)).unwrap());
    }
}

#[test]
fn config_errors_name_the_path() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.json"), r#"{"kind": "band-profile", "predictor": {"n_zbb": 3}}"#).unwrap();
    let out = run_in(tmp.path(), &["--config", "bad.json"], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("predictor.n_zbb"));

    let out = run_in(tmp.path(), &["--kind", "band-profile", "--epsilon", "1.5"], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("profile.epsilon"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn numeric_failures_carry_module_context() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), &["--kind", "band-profile", "--omega", "6", "--shell-levels", "40"], "1");
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("band-profile pipeline") && err.contains("spectral"), "{err}");
}

#[test]
fn scaling_hbar_writes_fits_and_scripts() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("s.json"), r#"{"kind": "scaling-hbar", "omegas": [16, 20, 24, 28], "profile": {"shell_levels": 15}}"#)
        .unwrap();
    let out = run_in(tmp.path(), &["--config", "s.json", "--out", "s"], "1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fits = json(&tmp.path().join("s/fits.json"));
    let f = fits["fits"].as_array().unwrap();
    assert_eq!(f.len(), 3);
    assert!(f.iter().all(|x| x["fit"]["r2"].is_number()));
    assert_eq!(fits["points"].as_array().unwrap().len(), 4);
    let csv = fs::read_to_string(tmp.path().join("s/dos_scaling.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,fit"));
    let gp = fs::read_to_string(tmp.path().join("s/dos_scaling.gp")).unwrap();
    assert!(gp.contains("set logscale xy") && gp.contains("using 1:3"));
}

#[test]
fn oracle_run_passes() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), &["--kind", "oracle1d", "--out", "o"], "1");
    assert!(out.status.success());
    let rep = json(&tmp.path().join("o/oracle_report.json"));
    assert_eq!(rep["all_pass"], Value::Bool(true));
    assert!(rep["max_rel_err"].as_f64().unwrap() < 1e-3);
}

#[test]
fn bandwidth_run_reports_tau() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("b.json"),
        r#"{"kind": "bandwidth", "model": {"omega": 30}, "energy": 35.9, "bandwidth": {"n_width_points": 4, "n_directions": 32}}"#,
    )
    .unwrap();
    let out = run_in(tmp.path(), &["--config", "b.json", "--samples", "2000", "--seed", "3", "--out", "b"], "1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = json(&tmp.path().join("b/bandwidth.json"));
    let w = b["estimate"]["w_b"]["value"].as_f64().unwrap();
    let tau = b["thermalization_time"].as_f64().unwrap();
    assert!((w * tau - 1.0 / 30.0).abs() < 1e-12);
    let m = json(&tmp.path().join("b/manifest.json"));
    assert_eq!(m["config"]["bandwidth"]["n_samples"], 2000);
    assert_eq!(m["config"]["bandwidth"]["seed"], 3);
}

#[test]
fn plot_scripts_for_each_schema() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path();
    fs::write(p.join("profile.csv"), "omega,value,count\n-0.1,0.5,3\n0,1,4\n0.1,0.5,3\n").unwrap();
    fs::write(p.join("scaling.csv"), "x,y,fit\n1,2,2\n2,4,4\n").unwrap();
    fs::write(p.join("empty.csv"), "omega,value,count\n").unwrap();
    fs::write(p.join("other.csv"), "a,b\n1,2\n").unwrap();
    let prof = emit_plot_script(&[&p.join("profile.csv")], None).unwrap();
    assert!(prof.contains("set logscale y") && prof.contains("'profile.csv'"));
    let sc = emit_plot_script(&[&p.join("scaling.csv")], None).unwrap();
    assert!(sc.contains("title 'fit'"));
    assert!(emit_plot_script(&[&p.join("empty.csv")], None).is_err());
    assert!(emit_plot_script(&[&p.join("other.csv")], None).is_err());

    let out = bin().arg("plot").arg(p.join("empty.csv")).output().unwrap();
    assert!(!out.status.success());
    let out = bin().arg("plot").arg(p.join("scaling.csv")).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), sc);
}

#[test]
fn schema_lists_every_top_level_key() {
    let schema: Value = serde_json::from_str(CONFIG_SCHEMA).unwrap();
    let props = schema["properties"].as_object().unwrap();
    let cfg = serde_json::to_value(ExperimentConfig::new(ethweyl_cli::Kind::Oracle1d)).unwrap();
    for k in cfg.as_object().unwrap().keys() {
        assert!(props.contains_key(k), "schema misses `{k}`");
    }
    for section in ["profile", "predictor", "bandwidth", "oracle"] {
        let keys = props[section]["properties"].as_object().unwrap();
        for k in cfg[section].as_object().unwrap().keys() {
            assert!(keys.contains_key(k), "schema misses `{section}.{k}`");
        }
    }
    let out = bin().arg("schema").output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), CONFIG_SCHEMA);
}
