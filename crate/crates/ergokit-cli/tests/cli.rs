use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn workspace(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/workspaces").join(format!("{name}.json"))
}

fn scratch(name: &str, body: &Value) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ergokit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, serde_json::to_string(body).unwrap()).unwrap();
    p
}

fn run(cmd: &str, ws: &PathBuf, args: &[&str], env: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ergokit"));
    c.arg(cmd).arg(ws).args(args).env_remove("ERGOKIT_BUDGET");
    if let Some(b) = env {
        c.env("ERGOKIT_BUDGET", b);
    }
    c.output().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error_code(o: &Output) -> String {
    report(o)["error"]["code"].as_str().unwrap().to_string()
}

#[test]
fn empty_workspace() {
    let o = run("validate", &scratch("empty", &json!({"field": {"d": 0}})), &[], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["verification"]["verified"], json!(true));
}

#[test]
fn swap_distance() {
    let o = run("metric", &workspace("swap"), &["d_mu", "T", "id"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o)["result"]["value"], json!("1/2"));
}

#[test]
fn translation_is_dissipative() {
    let o = run("analyze", &workspace("translation"), &["hopf", "T"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("DISSIPATIVE"));
    assert!(text.contains("\"verified\": true"));
}

#[test]
fn aperiodic_three_involutions_rejected() {
    let o = run("construct", &workspace("golden"), &["threeinv", "T"], None);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_code(&o), "UNSUPPORTED_APERIODIC");
    assert!(report(&o).get("result").is_none());
    assert!(String::from_utf8(o.stderr).unwrap().contains("UNSUPPORTED_APERIODIC"));
}

#[test]
fn overlapping_pieces_rejected_with_witness() {
    let body = json!({"field": {"d": 0}, "maps": {"T": {
        "core_pieces": [{"lo": "0", "hi": "2", "shift": "1"}, {"lo": "1", "hi": "3", "shift": "-1"}],
        "elsewhere": "identity"}}});
    let o = run("validate", &scratch("overlap", &body), &[], None);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&o);
    assert_eq!(r["error"]["code"], json!("VALIDATION_ERROR"));
    assert_eq!(r["error"]["cause"], json!("DOMAIN_OVERLAP"));
    assert_eq!(r["error"]["witness"], json!(["1", "2"]));
}

#[test]
fn paste_overlap_is_a_validation_failure() {
    let o = run("op", &workspace("ops"), &["paste", "id", "P", "T", "N"], None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_code(&o), "IMAGE_OVERLAP");
    assert_eq!(report(&o)["error"]["witness"], json!(["0", "1"]));
}

#[test]
fn bad_input() {
    let o = run("validate", &scratch("field", &json!({"field": {"d": 0}, "scalars": {"x": "1+1*rt(5)"}})), &[], None);
    assert_eq!((o.status.code(), error_code(&o).as_str()), (Some(2), "FIELD_MISMATCH"));
    let o = run("validate", &scratch("parse", &json!({"field": {"d": 0}, "sets": {"A": {"core": [["0", "x"]]}}})), &[], None);
    assert_eq!((o.status.code(), error_code(&o).as_str()), (Some(2), "PARSE_ERROR"));
    assert!(report(&o)["error"]["message"].as_str().unwrap().contains("/sets/A/core/0"));
    let o = run("metric", &workspace("swap"), &["d_mu", "T", "Nope"], None);
    assert_eq!((o.status.code(), error_code(&o).as_str()), (Some(2), "UNKNOWN_NAME"));
    let o = run("validate", &workspace("does_not_exist"), &[], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_precedence() {
    let args = ["induce", "T", "D"];
    let ws = workspace("cycle");
    assert_eq!(run("analyze", &ws, &args, None).status.code(), Some(0));
    assert_eq!(run("analyze", &ws, &args, Some("2")).status.code(), Some(3));
    let o = run("analyze", &ws, &["induce", "T", "D", "--budget", "5"], Some("2"));
    assert_eq!(o.status.code(), Some(0));
    let mut body: Value = serde_json::from_str(&std::fs::read_to_string(&ws).unwrap()).unwrap();
    body["options"] = json!({"budget": 2});
    let capped = scratch("capped", &body);
    let o = run("analyze", &capped, &args, None);
    assert_eq!((o.status.code(), error_code(&o).as_str()), (Some(3), "BUDGET_EXHAUSTED"));
    assert_eq!(run("analyze", &capped, &args, Some("9")).status.code(), Some(0));
}

#[test]
fn validate_round_trip_is_stable() {
    for name in ["metrics", "mixed", "blockwise_golden", "staircase_involution"] {
        let o = run("validate", &workspace(name), &[], None);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let canonical = report(&o)["result"]["workspace"].clone();
        let again = run("validate", &scratch(name, &canonical), &[], None);
        assert_eq!(report(&again)["result"]["workspace"], canonical, "{name}");
    }
}

#[test]
fn tsv_and_plot() {
    let ws = workspace("swap");
    let o = run("metric", &ws, &["d_mu", "T", "id", "--out", "tsv"], None);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "result.value\t1/2"), "{text}");
    let o = run("analyze", &ws, &["classify", "T", "--plot"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.trim(), "0.000000000\t2.000000000\tPERIODIC");
}
