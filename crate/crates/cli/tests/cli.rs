use std::process::Command;

use serde_json::Value;
use zipchow_core::ScalarP;

fn run(args: &[&str]) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("zipchow").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = zipchow::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn terms(v: &Value) -> Vec<(Value, String)> {
    v["terms"].as_array().unwrap().iter().map(|t| (t["J"].clone(), t["coefficient"].as_str().unwrap().to_string())).collect()
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["expand", "--d", "5"],
        &["expand", "--d", "5", "--set", "1,9"],
        &["expand", "--d", "0", "--set", "0"],
        &["cone", "--hilbert-inert", "--k", "1,2", "--p", "5"],
        &["cone", "--hilbert-inert", "--k", "1,2,3", "--p", "4"],
        &["classify", "--type", "Q7", "--levi", "1"],
        &["diagram", "--fixture", "no-such-fixture", "--check"],
    ] {
        let (code, out, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty(), "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn assert_flag_exits_one_on_negative_answer() {
    let (code, out, _) = run(&["cone", "--hilbert-inert", "--k", "p^3-1,p^2,p^3-1", "--p", "5", "--assert"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["in_pha"], false);
    assert_eq!(v["ample"], true);
    let (code, _, _) = run(&["expand", "--d", "4", "--set", "0,2", "--assert"]);
    assert_eq!(code, 0);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["expand", "--d", "6", "--set", "0,2,3"][..],
        &["sweep", "curves", "--samples", "200", "--primes", "2,3"],
        &["diagram", "--fixture", "c2", "--check"],
    ] {
        assert_eq!(run(args), run(args), "{args:?}");
    }
}

#[test]
fn evaluation_commutes_with_expansion() {
    let symbolic = json(&["expand", "--d", "5", "--set", "0,2"]);
    for p in [2i64, 3, 7] {
        let numeric = json(&["expand", "--d", "5", "--set", "0,2", "--at-p", &p.to_string()]);
        let expected: Vec<(Value, String)> = terms(&symbolic)
            .into_iter()
            .map(|(j, c)| (j, ScalarP::parse(&c).unwrap().eval_int(p).unwrap().to_string()))
            .collect();
        assert_eq!(terms(&numeric), expected, "p={p}");
    }
}

#[test]
fn methods_agree() {
    let closed = terms(&json(&["expand", "--d", "5", "--set", "1,3"]));
    for m in ["gauss", "oracle"] {
        assert_eq!(terms(&json(&["expand", "--d", "5", "--set", "1,3", "--method", m])), closed, "{m}");
    }
    let kunneth = terms(&json(&["expand", "--d", "5", "--set", "1,3", "--method", "kunneth", "--blocks", "5"]));
    assert_eq!(kunneth, closed);
}

#[test]
fn resource_cap_from_environment() {
    let bin = env!("CARGO_BIN_EXE_zipchow");
    let out = Command::new(bin).args(["expand", "--d", "5", "--set", "0"]).env("ZIPCHOW_MAX_D", "4").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ZIPCHOW_MAX_D"));
    let out = Command::new(bin).args(["expand", "--d", "4", "--set", "0"]).env("ZIPCHOW_MAX_D", "4").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn dot_output() {
    let (code, out, _) = run(&["diagram", "--fixture", "c2", "--emit-dot"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph"));
    assert!(out.contains("\"w0\" -> \"sgn1\""));
    assert!(out.trim_end().ends_with('}'));
}

#[test]
fn text_format() {
    let (code, out, _) = run(&["--format", "text", "expand", "--d", "3", "--set", "0,1"]);
    assert_eq!(code, 0);
    assert!(out.contains("J=[0,1] coefficient=p/(p^3+1)"));
    assert!(serde_json::from_str::<Value>(&out).is_err());
}

#[test]
fn corrupted_fixture_file_fails_check() {
    let src = include_str!("../../core/fixtures/c2.json");
    let bad = src.replacen("\"class\": \"(p^4-1)*l1*l2^3\"", "\"class\": \"(p^4-1)*l1*l2^2\"", 1);
    assert_ne!(src, bad);
    let path = std::env::temp_dir().join(format!("zipchow-bad-c2-{}.json", std::process::id()));
    std::fs::write(&path, bad).unwrap();
    let (code, out, _) = run(&["diagram", "--fixture", path.to_str().unwrap(), "--check"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn classify_and_certify() {
    let v = json(&["classify", "--type", "C2", "--levi", "1"]);
    assert_eq!(v["linear"], true);
    let v = json(&["classify", "--type", "A3", "--levi", "1,3"]);
    assert_eq!(v["linear"], false);
    let v = json(&["certify", "--d", "4"]);
    assert_eq!(v["oracle_agrees"], true);
    assert_eq!(v["permutation_at_zero"], true);
}

#[test]
fn small_sweeps_pass() {
    for kind in ["reciprocity", "orthogonality", "interval", "codim1", "oracle", "nonnegativity"] {
        let v = json(&["sweep", kind, "--max-d", "4"]);
        assert_eq!(v["failed"], 0, "{kind}");
        assert!(v["cases"].as_u64().unwrap() > 0, "{kind}");
    }
}
