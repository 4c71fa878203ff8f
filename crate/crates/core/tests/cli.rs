use std::path::PathBuf;
use std::process::{Command, Output};

use periodgram::cli::TABLE_CSV_HEADER;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_periodgram"));
    c.env_remove(periodgram::cli::CACHE_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn periodgram")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("periodgram-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn table_csv_matches_golden() {
    let o = run(&["--csv", "--precision", "30", "table", "--family", "two_param", "--n-max", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some(TABLE_CSV_HEADER));
    assert_eq!(text, golden("table_two_param_n4.csv"));
}

#[test]
fn amalgam_csv_matches_golden() {
    let o = run(&["--csv", "amalgam-check", "--m", "2", "--n", "2", "--trials", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("amalgam_2x2.csv"));
}

#[test]
fn json_output_is_deterministic() {
    for args in [
        &["fekete", "--family", "two_param", "--n", "3", "--restarts", "3", "--seed", "5"][..],
        &["--workers", "1", "fekete", "--family", "two_param", "--n", "3", "--restarts", "3", "--seed", "5"][..],
        &["minkowski", "--family", "two_param", "--n", "3"][..],
        &["montecarlo", "--family", "two_param", "--n", "2", "--samples", "200000", "--seed", "3"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let one = run(&["--workers", "1", "fekete", "--family", "two_param", "--n", "3", "--restarts", "3", "--seed", "5"]);
    let four =
        run(&["--workers", "4", "fekete", "--family", "two_param", "--n", "3", "--restarts", "3", "--seed", "5"]);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn integral_json() {
    let o = run(&["integral", "--s", "0,0,1,0,1", "--oracle"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["const_part"], "-1");
    assert_eq!(v["xi_part"], "1");
    assert!(v["numeric"].as_str().unwrap().starts_with("0.6449340668482264364724151666460251892189"));
    assert!(v["oracle"]["abs_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn bounds_outputs() {
    let o = run(&["bounds", "--which", "tau-eps", "--eps", "0.09"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["best_upper"].as_f64().unwrap() <= 0.25);
    let o = run(&["bounds", "--which", "zeta2-region"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["upper"]["value"].as_f64().unwrap() < 0.023);
    let o = run(&["bounds", "--which", "closed-form", "--region", "box:0,2,0,1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - (0.5f64 * 0.25).sqrt()).abs() < 1e-12);
    let o = run(&["bounds", "--which", "rank-identity", "--n", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["integral", "--s", "1,2,3"]).status.code(), Some(2));
    assert_eq!(run(&["table", "--family", "nope", "--n-max", "2"]).status.code(), Some(2));
    assert_eq!(run(&["--precision", "3", "gram", "--family", "two_param", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["--workers", "0", "gram", "--family", "two_param", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--which", "tau-eps", "--eps", "2"]).status.code(), Some(2));
    assert_eq!(run(&["fekete", "--basis", "rect:3", "--region", "unit_square"]).status.code(), Some(2));
    assert_eq!(run(&["amalgam-check", "--m", "3", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["--csv", "bounds", "--which", "eta"]).status.code(), Some(2));
    assert_eq!(run(&["--exact-limit", "3", "gram", "--family", "two_param", "--n", "2"]).status.code(), Some(0));
    assert!(run(&["--help"]).status.success());
}

#[test]
fn cache_roundtrip_and_env_precedence() {
    let dir = scratch_dir("cache");
    let flag = dir.join("flag.json");
    let env = dir.join("env.json");
    let o = run(&["--cache", flag.to_str().unwrap(), "gram", "--family", "two_param", "--n", "3"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&flag).unwrap()).unwrap();
    assert!(doc["entries"].as_array().unwrap().len() > 10);

    let again = run(&["--cache", flag.to_str().unwrap(), "gram", "--family", "two_param", "--n", "3"]);
    assert_eq!(o.stdout, again.stdout);

    let o = bin()
        .env(periodgram::cli::CACHE_ENV, &env)
        .args(["--cache", dir.join("ignored.json").to_str().unwrap(), "integral", "--s", "1,1,1,1,1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env.exists());
    assert!(!dir.join("ignored.json").exists());

    std::fs::write(&flag, "{ not json").unwrap();
    assert_eq!(run(&["--cache", flag.to_str().unwrap(), "integral", "--s", "0,0,0,0,0"]).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn output_file() {
    let dir = scratch_dir("out");
    let path = dir.join("t.csv");
    let o = run(&["--csv", "-o", path.to_str().unwrap(), "table", "--family", "five_param", "--n-max", "2"]);
    assert!(o.status.success() && o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("2^45·3^30"));
    let _ = std::fs::remove_dir_all(&dir);
}
