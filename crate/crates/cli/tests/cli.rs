use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcone"))
        .args(args)
        .env_remove("SYMCONE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse::<f64>().expect("number")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn solve_lp_fixture() {
    let o = run(&["solve", fixture("lp.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("objective 1.000000"), "{out}");
    assert!(field(&out, "gap ") <= 1e-6);
}

#[test]
fn solve_socp_and_sdp_fixtures() {
    let o = run(&["solve", fixture("socp.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "objective ") - std::f64::consts::SQRT_2).abs() < 1e-6);
    let o = run(&["solve", fixture("sdp.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "objective ") - 2.0).abs() < 1e-6);
}

#[test]
fn solve_json_output() {
    let o = run(&["solve", fixture("lp.json").to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["status"], "Optimal");
    assert!((v["objective"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn solve_rejects_boundary_start() {
    let o = run(&["solve", fixture("boundary.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("x0 not interior"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn solve_iteration_limit() {
    let o = run(&["solve", fixture("socp.json").to_str().unwrap(), "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_reports_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"cone\": {\"family\": \"orthant\", \"param\": 2},\n  \"x0\": \"oops\"\n}").unwrap();
    let o = run(&["solve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let o = run(&["solve", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_sympsd() {
    let o = run(&["verify", "--family", "sympsd", "--dims", "3", "--weights", "1", "--trials", "50", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for tag in ["ss-1", "ss-2", "sym-2", "fundamental", "prop2.1-i"] {
        assert!(out.contains(tag), "{tag} missing from {out}");
    }
}

#[test]
fn verify_rejects_small_weight() {
    let o = run(&["verify", "--family", "sympsd", "--dims", "3", "--weights", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("c_i >= 1"));
}

#[test]
fn verify_weighted_sum() {
    let o = run(&["verify", "--family", "sum(orthant:2, lorentz:3)", "--weights", "1,2", "--trials", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_is_deterministic_and_reads_seed_env() {
    let args = ["verify", "--family", "lorentz", "--dims", "3", "--trials", "10", "--json"];
    let a = run(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_symcone")).args(args).env("SYMCONE_SEED", "0").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_symcone")).args(args).env("SYMCONE_SEED", "5").output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
    assert_eq!(v["seed"], 5);
}

fn block_rows(out: &str) -> Vec<(usize, usize)> {
    let mut rows: Vec<(usize, usize)> = out
        .lines()
        .skip(1)
        .take_while(|l| !l.starts_with("closure"))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    rows
}

#[test]
fn decompose_cone_specs() {
    for seed in ["1", "17"] {
        let o = run(&["decompose", "sum(lorentz:3, orthant:2)", "--scramble-seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(block_rows(&stdout(&o)), vec![(4, 2), (1, 1), (1, 1)]);
    }
    let o = run(&["decompose", "sympsd:3"]);
    assert_eq!(block_rows(&stdout(&o)), vec![(6, 3)]);
    assert!(stdout(&o).contains("sympsd"));
}

#[test]
fn decompose_json_and_invalid_tensor() {
    let o = run(&["decompose", "orthant:3", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 3);
    let o = run(&["decompose", fixture("noncommutative.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("commutative"));
}

#[test]
fn identify_weighted_fixture() {
    let path = fixture("weighted_sum.json");
    for extra in [vec![], vec!["--scramble-seed", "9"]] {
        let mut args = vec!["identify", path.to_str().unwrap(), "--json"];
        args.extend(extra);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let mut got: Vec<f64> = v["blocks"].as_array().unwrap().iter().map(|b| b["recovered"].as_f64().unwrap()).collect();
        got.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((got[0] - 2.0).abs() < 1e-6 && (got[1] - 1.0).abs() < 1e-6);
        assert!((v["offset_recovered"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    }
}

#[test]
fn identify_standard_orthant() {
    let o = run(&["identify", "orthant:3", "--weights", "1,1,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("max deviation"));
}
