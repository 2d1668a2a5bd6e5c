use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

use grushin_cli::config::{self, RunConfig};
use grushin_cli::Flags;
use grushin_core::scaling::ReferenceSpectrum;
use grushin_core::sturm::BoundaryCondition;

fn grushin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grushin"))
        .args(args)
        .env_remove("GRUSHIN_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn error_code(out: &Output) -> String {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("error line on stderr");
    let v: serde_json::Value = serde_json::from_str(line).expect("JSON error object");
    v["code"].as_str().expect("code field").to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn params_reports_derived_constants() {
    let out = grushin(&["params", "--n", "1", "--beta", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["c_beta"], 1.3125);
    assert_eq!(v["d"], 2.5);
    assert_eq!(v["regime"], "supercritical");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"c_beta\": 1.3125"));
}

#[test]
fn critical_profile_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = grushin(&[
        "profile",
        "--n",
        "1",
        "--beta",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "regime");
}

#[test]
fn usage_and_domain_errors_exit_2() {
    assert_eq!(grushin(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(grushin(&["params", "--no-such-flag"]).status.code(), Some(2));
    let both = grushin(&["params", "--beta", "3", "--alpha", "1"]);
    assert_eq!(both.status.code(), Some(2));
    assert_eq!(error_code(&both), "parameter_domain");
    let list = grushin(&["weyl", "--lambda", "2000,1000"]);
    assert_eq!(list.status.code(), Some(2));
}

#[test]
fn resonant_hf_check_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = grushin(&[
        "hf-check",
        "--s",
        "0.05",
        "--v1",
        "const:1",
        "--epsilon",
        "0.01",
        "--k-max",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_code(&out), "degeneracy");
}

#[test]
fn outputs_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "8")] {
        for cmd in [
            vec!["spectrum", "--lambda", "400"],
            vec!["profile", "--k-max", "40", "--alpha", "1.2"],
            vec!["density", "--lambda", "200,400", "--k-max", "40"],
            vec!["hf-check", "--k-max", "20"],
        ] {
            let mut args = cmd.clone();
            args.extend(["--workers", workers, "--out", dir.path().to_str().unwrap()]);
            let out = grushin(&args);
            assert!(
                out.status.success(),
                "{:?}: {}",
                cmd,
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
    let fa = read_dir_sorted(a.path());
    let fb = read_dir_sorted(b.path());
    assert_eq!(fa.len(), 10);
    assert_eq!(fa, fb);
}

#[test]
fn artifacts_have_documented_headers_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(grushin(&["spectrum", "--k-max", "10", "--out", d])
        .status
        .success());
    assert!(
        grushin(&["spectrum", "--lambda", "200", "--format", "csv", "--out", d])
            .status
            .success()
    );
    assert!(
        grushin(&["profile", "--k-max", "20", "--format", "csv", "--out", d])
            .status
            .success()
    );
    assert!(grushin(&["weyl", "--lambda", "100,200,400", "--out", d])
        .status
        .success());

    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("j,k,multiplicity,lambda"));
    assert!(!dir.path().join("table.json").exists());
    let profile = fs::read_to_string(dir.path().join("profile_b.csv")).unwrap();
    let mut lines = profile.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# kind=B n=1 beta=3 k_used=20 defect="));
    assert_eq!(lines.next(), Some("x,value"));
    let weyl = fs::read_to_string(dir.path().join("weyl.csv")).unwrap();
    assert_eq!(weyl.lines().next(), Some("lambda,N"));
    assert!(table.bytes().all(|b| b != b'\r'));

    let json = fs::read_to_string(dir.path().join("reference.json")).unwrap();
    let back: ReferenceSpectrum = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_json().unwrap(), json);
    assert_eq!(back.k_max(), 10);
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\nn = 2\nbeta = 1.5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let out = grushin(&["params", "--config", c]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["beta"], 1.5);
    let out = grushin(&["params", "--config", c, "--beta", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["beta"], 4.0);

    fs::write(&cfg, "n = 1\nwidth = 3\n").unwrap();
    let out = grushin(&["params", "--config", c]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "schema");
}

fn resolve(file: &str, flags: &Flags) -> RunConfig {
    let file = config::parse_config_text(file).unwrap();
    RunConfig::from_pairs(&config::merge(&file, &flags.to_pairs())).unwrap()
}

proptest! {
    #[test]
    fn precedence_defaults_file_flags(
        file_k in proptest::option::of(1usize..500),
        flag_k in proptest::option::of(1usize..500),
        file_x in proptest::option::of(0.1f64..10.0),
        flag_x in proptest::option::of(0.1f64..10.0),
        file_bc in proptest::option::of(proptest::bool::ANY),
        flag_bc in proptest::option::of(proptest::bool::ANY),
    ) {
        let bc = |b: bool| if b { "neumann" } else { "dirichlet" };
        let mut text = String::new();
        if let Some(k) = file_k { text.push_str(&format!("k_max = {k}\n")); }
        if let Some(x) = file_x { text.push_str(&format!("x_max = {x}\n")); }
        if let Some(b) = file_bc { text.push_str(&format!("right_bc = {}\n", bc(b))); }
        let flags = Flags {
            k_max: flag_k.map(|k| k.to_string()),
            x_max: flag_x.map(|x| x.to_string()),
            right_bc: flag_bc.map(|b| bc(b).to_string()),
            ..Flags::default()
        };
        let got = resolve(&text, &flags);
        prop_assert_eq!(got.k_max, flag_k.or(file_k).unwrap_or(200));
        prop_assert_eq!(got.x_max, flag_x.or(file_x).unwrap_or(1.0));
        let want_bc = match flag_bc.or(file_bc) {
            Some(true) => BoundaryCondition::Neumann,
            _ => BoundaryCondition::Dirichlet,
        };
        prop_assert_eq!(got.right_bc, want_bc);
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let mut map = BTreeMap::new();
    map.insert("colour".to_string(), "red".to_string());
    assert!(RunConfig::from_pairs(&map).is_err());
    assert!(config::parse_config_text("n 1\n").is_err());
    assert!(config::parse_config_text("n = 1\nn = 2\n").is_err());
}
