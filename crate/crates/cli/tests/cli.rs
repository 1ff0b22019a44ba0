use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn semibif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semibif")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--json", "-"]);
    let o = semibif(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn num(v: &Value) -> f64 {
    match v {
        Value::Number(n) => n.as_f64().unwrap(),
        Value::String(s) if s == "inf" => f64::INFINITY,
        Value::String(s) if s == "-inf" => f64::NEG_INFINITY,
        other => panic!("not a number: {other}"),
    }
}

#[test]
fn analyze_log() {
    let r = report(&["analyze", "ln(u)"]);
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["input", "landmarks", "conditions", "endpoints", "classification", "warnings", "files"] {
        assert!(keys.contains(&k), "missing {k} in {keys:?}");
    }
    let c = &r["classification"];
    assert_eq!(c["shape"], "SubsetShaped");
    assert!((num(&c["start"]["lambda"]) - 8.539).abs() < 0.01);
    assert!((num(&c["start"]["alpha"]) - std::f64::consts::E).abs() < 1e-9);
    assert_eq!(c["end"]["lambda"], "inf");
    assert_eq!(c["end"]["alpha"], "inf");
    assert!(c["rule_fired"].is_string());
}

#[test]
fn analyze_exponential_is_decreasing_via_c2() {
    let c = &report(&["analyze", "exp(u)-2"])["classification"];
    assert_eq!(c["shape"], "MonotoneDecreasing");
    assert_eq!(c["rule_fired"], "C2");
    assert_eq!(num(&c["end"]["lambda"]), 0.0);
    assert_eq!(c["end"]["alpha"], "inf");
}

#[test]
fn analyze_nonexistent_curve_exits_zero() {
    let o = semibif(&["analyze", "--", "-(u-1)*(u-2)"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("CurveDoesNotExist"));
}

#[test]
fn analyze_not_covered_exits_zero() {
    let o = semibif(&["analyze", "u + 1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("NotCovered"));
}

#[test]
fn analyze_reports_parse_errors() {
    let o = semibif(&["analyze", "sin(u)"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown function"), "{}", stderr(&o));
    let o = semibif(&["analyze", "sigma - 1/sqrt(u)"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sigma"), "{}", stderr(&o));
    let o = semibif(&["analyze", "--fixture", "E42"]);
    assert!(stderr(&o).contains("unknown fixture"));
}

#[test]
fn params_bind_free_identifiers() {
    let c = &report(&["analyze", "sigma - 1/sqrt(u)", "--param", "sigma=2"])["classification"];
    assert_eq!(c["shape"], "MonotoneIncreasing");
    let lambda = num(&c["start"]["lambda"]);
    assert!((lambda - std::f64::consts::PI.powi(2) / 4.0).abs() < 1e-6, "{lambda}");
}

#[test]
fn limit_overrides_are_echoed_and_used() {
    let r = report(&["analyze", "ln(u)", "--assert-limit", "g0=zero"]);
    assert_eq!(r["input"]["asserted_limits"][0][0], "g0");
    assert_eq!(r["input"]["asserted_limits"][0][1], "zero");
    let lh = &r["endpoints"]["lambda_hat"];
    assert_eq!(lh["value"], "inf");
    assert!(lh["provenance"].as_str().unwrap().contains("asserted"), "{lh}");
    let o = semibif(&["analyze", "ln(u)", "--assert-limit", "g0=sideways"]);
    assert!(!o.status.success());
}

#[test]
fn trace_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e1.csv");
    let o = semibif(&["trace", "ln(u)", "-n", "64", "-o", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,T,lambda,T_prime");
    assert_eq!(lines.len(), 65);
    assert!(!text.contains('\r'));
}

#[test]
fn trace_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let sub = dir.path().join(tag);
        fs::create_dir(&sub).unwrap();
        let (csv, json) = (sub.join("e7.csv"), sub.join("e7.json"));
        let o = semibif(&[
            "trace",
            "--fixture",
            "E7",
            "-n",
            "24",
            "-o",
            csv.to_str().unwrap(),
            "--json",
            json.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let j = fs::read_to_string(&json).unwrap().replace(sub.to_str().unwrap(), "");
        (fs::read_to_string(&csv).unwrap(), j)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn trace_svg_marks_the_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("e7.svg");
    let o = semibif(&["trace", "--fixture", "E7", "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches(r#"class="minimum""#).count(), 1);
}

#[test]
fn trace_of_appendix_counterexample_fails() {
    let o = semibif(&["trace", "--fixture", "appendix-counterexample"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("T undefined for α ≤ γ=1"), "{}", stderr(&o));
}

#[test]
fn verify_passes_on_fixtures() {
    for args in [
        &["verify", "--fixture", "E2"][..],
        &["verify", "--fixture", "E8"],
        &["verify", "--fixture", "E5", "--param", "a=1", "--param", "b=4"],
    ] {
        let o = semibif(args);
        assert!(o.status.success(), "{args:?}: {}{}", stdout(&o), stderr(&o));
        let out = stdout(&o);
        assert!(out.contains("pass"), "{out}");
        let worst: f64 =
            out.lines().find_map(|l| l.strip_prefix("worst |u(1)|:")).unwrap().trim().parse().unwrap();
        assert!(worst <= 1e-5, "{args:?}: {worst}");
    }
}

#[test]
fn verify_json_carries_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let o = semibif(&["verify", "--fixture", "E3", "-n", "8", "--json", json.to_str().unwrap()]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r["verification"]["passed"], true);
    assert_eq!(r["verification"]["points"], 8);
}

#[test]
fn fixture_listing() {
    let o = semibif(&["fixtures"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "appendix-counterexample"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    assert!(out.contains("7+4√3"));
    assert!(out.contains("λ̂ ≈ 0.038") || out.contains("lambda_hat: ≈ 0.038"));
}

#[test]
fn every_fixture_matches_its_published_shape() {
    for (name, want) in [
        ("E1", "SubsetShaped"),
        ("E2", "MonotoneDecreasing"),
        ("E3", "MonotoneIncreasing"),
        ("E4", "MonotoneIncreasing"),
        ("E5", "SubsetShaped"),
        ("E6", "MonotoneDecreasing"),
        ("E7", "SubsetShaped"),
        ("E8", "SubsetShaped"),
        ("E9", "MonotoneDecreasing"),
        ("appendix-counterexample", "CurveDoesNotExist"),
    ] {
        let r = report(&["analyze", "--fixture", name]);
        assert_eq!(r["classification"]["shape"], want, "{name}");
        assert_eq!(r["input"]["fixture"], name);
    }
}
