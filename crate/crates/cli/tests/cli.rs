use std::path::PathBuf;
use std::process::{Command, Output};

fn equilift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equilift")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("equilift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn divisor_gen_writes_valid_json() {
    let out = scratch("d.json");
    let o = equilift(&[
        "divisor", "gen", "--kind", "poisson", "--intensity", "0.5", "--window", "-16,16,-16,16", "--seed", "42",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d = equilift::divisors::Divisor::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(d.len() > 300 && d.len() < 750);
    let again = scratch("d2.json");
    equilift(&[
        "divisor", "gen", "--kind", "poisson", "--intensity", "0.5", "--window", "-16,16,-16,16", "--seed", "42",
        "--out", again.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn config_errors_exit_two_with_one_line() {
    for args in [
        &["divisor", "gen", "--kind", "poisson", "--window", "1,0,0,1", "--seed", "1", "--out", "x.json"][..],
        &["divisor", "gen", "--kind", "poisson", "--intensity", "-1", "--seed", "1", "--out", "/nonexistent/x.json"],
        &["verify", "equivariance", "--divisor", "/nonexistent/d.json"],
        &["dbar", "counterexample", "--n", "9:3"],
    ] {
        let o = equilift(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn dbar_table_passes_and_writes_csv() {
    let out = scratch("ce.csv");
    let o = equilift(&["dbar", "counterexample", "--n", "5:20", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("n,computed,bound,core,normalized\n"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn failing_check_exits_one() {
    let o = equilift(&["demo", "riesz", "--t-min", "1", "--t-max", "1.5", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&o.stderr).lines().count(), 1);
}

#[test]
fn equivariance_report_passes() {
    let d = scratch("small.json");
    let report = scratch("eq.json");
    let o = equilift(&[
        "divisor", "gen", "--kind", "jittered", "--spacing", "1.5", "--jitter", "0.3", "--window", "-12,12,-12,12",
        "--seed", "3", "--out", d.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = equilift(&[
        "verify", "equivariance", "--divisor", d.to_str().unwrap(), "--shift", "0.37,1.2", "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["checks"][0]["status"], "PASS");
    assert!(r["checks"][0]["measured"].as_f64().unwrap() < 1e-6);
}
