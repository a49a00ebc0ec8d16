use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoslab"))
        .args(args)
        .env_remove("CHAOSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_default_config_passes() {
    let out = run(&["verify", "--config", &fixture("verify.toml")]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("skorohod isometry"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_with_broken_constant_fails_and_names_check() {
    let out = run(&["verify", "--config", &fixture("fault.toml")]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL  diagonal part bound"));
    assert!(stderr(&out).contains("failed check: diagonal part bound"));
}

#[test]
fn verify_reports_are_byte_identical_per_seed() {
    let cfg = fixture("verify.toml");
    let a = run(&["verify", "--config", &cfg, "--seed", "5", "--json"]);
    let b = run(&["verify", "--config", &cfg, "--seed", "5", "--json"]);
    let c = run(&["verify", "--config", &cfg, "--seed", "6", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["passed"], true);
}

#[test]
fn config_errors_point_at_the_line() {
    let out = run(&["verify", "--config", &fixture("bad_key.toml")]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("max_horizn"));
}

#[test]
fn two_atom_law_distance() {
    let v = json(&["distance", &fixture("two_atom.json")]);
    let dk = v["kolmogorov"].as_f64().unwrap();
    assert!((dk - 0.341_344_746_068_542_9).abs() < 1e-12);
    assert_eq!(v["atoms"], 2);
}

#[test]
fn malformed_kernel_names_the_entry() {
    let out = run(&["moments", &fixture("malformed.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("entries[1]"));
}

#[test]
fn biased_fixture_bound_has_nonnegative_slack() {
    let v = json(&["bound", &fixture("biased_m2.json")]);
    assert!(v["wasserstein.slack"].as_f64().unwrap() >= 0.0);
    assert!(v["kolmogorov.slack"].as_f64().unwrap() >= 0.0);
    assert!((v["fourth_moment_excess"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn fixed_influence_fixture_is_dominated_by_influence_term() {
    let v = json(&[
        "bound",
        &fixture("product_m2_n10.json"),
        "--distance",
        "wasserstein",
    ]);
    let c2 = v["wasserstein.constant.C2"].as_f64().unwrap();
    let term = v["wasserstein.influence_term"].as_f64().unwrap();
    assert!((term - c2 / 2.0).abs() < 1e-12);
    assert!(term > v["wasserstein.moment_term"].as_f64().unwrap());
    assert!(v.get("kolmogorov.bound").is_none());
}

#[test]
fn symmetric_counterexample_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sym.json");
    let p = path.to_str().unwrap();
    let v = json(&[
        "counterexample",
        "--kind",
        "symmetric",
        "--m",
        "2",
        "--n",
        "4",
        "-o",
        p,
    ]);
    assert!((v["g_uniform"].as_f64().unwrap() - 14.0 / 3.0).abs() < 1e-12);
    let file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(file["provenance"]["residual"].as_f64().unwrap() <= 1e-12);
    assert!(!file["provenance"]["trace"].as_array().unwrap().is_empty());
    let m = json(&["moments", p]);
    assert!((m["fourth_moment[enumerate]"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn counterexample_preconditions_and_stdout_mode() {
    let out = run(&["counterexample", "--kind", "symmetric", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("requires n >= 4"));

    let out = run(&["counterexample", "--kind", "inhomogeneous", "--m", "1"]);
    assert!(out.status.success());
    let file: Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = file["model"]["homogeneous"].as_f64().unwrap();
    assert!((p - 0.788_675_134_594_812_9).abs() < 1e-12);
}

#[test]
fn engines_cross_check() {
    let v = json(&[
        "moments",
        &fixture("product_m2_n10.json"),
        "--engine",
        "both",
    ]);
    assert!(v["engine_agreement_residual"].as_f64().unwrap() < 1e-12);
    assert!(v.get("fourth_moment[symmetric-fast]").is_some());
}

#[test]
fn capacity_errors_name_the_cap() {
    let out = run(&[
        "distance",
        &fixture("product_m2_n10.json"),
        "--cap-enum",
        "4",
        "--samples",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least 1000 samples"));
    let out = run(&[
        "moments",
        &fixture("product_m2_n10.json"),
        "--engine",
        "enumerate",
        "--cap-enum",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--cap-enum"), "{}", stderr(&out));
}

#[test]
fn dejong_reports_rho_ratio() {
    let v = json(&["dejong", &fixture("product_m2_n10.json"), "--kappa-m", "2"]);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["kappa_m"], 2.0);
    assert!(v["slack"].as_f64().unwrap() >= 0.0);
}

#[test]
fn unnormalized_kernel_suggests_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    std::fs::write(
        &path,
        r#"{"m":2,"n":3,"entries":[{"set":[1,2],"value":2}]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["bound", p]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--normalize"));
    let v = json(&["bound", p, "--normalize"]);
    assert!((v["kolmogorov.exact"].as_f64().unwrap() - 0.341_344_746_068_542_9).abs() < 1e-12);
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_chaoslab"))
        .args(["moments", &fixture("product_m2_n10.json")])
        .env("CHAOSLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
}
