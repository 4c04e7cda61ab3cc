use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1fill")).args(args).output().expect("binary runs")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

const SQUARE: &str = r#"{"dim": 2, "vectors": [["1", "0"], ["0", "1"]]}"#;

#[test]
fn triangulate_the_square_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "z2.json", SQUARE);
    let o = run(&["triangulate", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["simplices"][2].as_array().unwrap().len(), 8);
}

#[test]
fn reduce_and_fatness() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "b.json", r#"{"dim": 2, "vectors": [["1", "0"], ["7", "1"]]}"#);
    let o = run(&["reduce", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["basis"]["vectors"], json!([["1/1", "0/1"], ["0/1", "1/1"]]));
    let out = dir.path().join("fat.json");
    let o = run(&["fatness", "--input", p.to_str().unwrap(), "--grid", "8", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["lebesgue_lb_float"].as_f64().unwrap() > 0.0);
}

#[test]
fn fill_the_backtracking_edge() {
    let dir = tempfile::tempdir().unwrap();
    let body = json!({
        "basis": {"dim": 1, "vectors": [["1"]]},
        "cycle": {"dim": 1, "terms": [
            {"coeff": "1", "vertices": [["1/10"], ["3/10"]]},
            {"coeff": "1", "vertices": [["3/10"], ["1/10"]]}
        ]}
    });
    let p = write(&dir, "z.json", &body.to_string());
    let o = run(&["fill", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let cert: l1fill::fillnorm::FillingCertificateJson = serde_json::from_value(v).unwrap();
    let cert = l1fill::fillnorm::FillingCertificate::from_json(&cert).unwrap();
    cert.recheck().unwrap();
}

#[test]
fn fill_reports_math_failures_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = json!({
        "basis": {"dim": 1, "vectors": [["1"]]},
        "cycle": {"dim": 1, "terms": [
            {"coeff": "1", "vertices": [["0"], ["1/2"]]},
            {"coeff": "1", "vertices": [["1/2"], ["1"]]}
        ]}
    });
    let p = write(&dir, "z.json", &body.to_string());
    let o = run(&["fill", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not null-homologous"));
}

#[test]
fn vn_three() {
    let o = run(&["vn", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v["value"].as_f64().unwrap().to_string().starts_with("1.0149416"));
    assert_eq!(v["provenance"], "derived: 2Λ(π/6)");
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.0149416"));
    assert_eq!(run(&["vn", "4"]).status.code(), Some(3));
}

#[test]
fn vn_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(&dir, "vn.txt", "4 0.5 made-up test value\n");
    let o = run(&["vn", "4", "--vn-table", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["provenance"], "table: made-up test value");
    let f = write(&dir, "f.json", r#"[{"name": "cusp", "subtorus": {"dim": 1, "vectors": [["10"]]}}]"#);
    let o = run(&["vn", "3", "--vol", "2.029883212819307", "--input", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["upper_bound"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(v["positivity"].is_string());
}

#[test]
fn c2_command() {
    let o = run(&["c2", "--dim", "1", "--s", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["c2"]["value"], "1/2");
    assert_eq!(v["c2"]["exact"], true);
}

#[test]
fn validate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let wedge = write(&dir, "wedge.json", r#"{"tops": [[0,1,2],[0,3,4]], "singular": [[0]]}"#);
    assert_eq!(run(&["validate", "--input", wedge.to_str().unwrap()]).status.code(), Some(1));
    let mut tops = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            tops.push(vec![i, (i + 1) % 3, 3 + j, 3 + (j + 1) % 3]);
        }
    }
    let join = json!({"tops": tops, "singular": [[0,1],[1,2],[0,2]]});
    let p = write(&dir, "join.json", &join.to_string());
    let o = run(&["validate", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["passed"], true);
    // boundary of a tetrahedron: a 2-sphere
    let s2 = write(&dir, "s2.json", r#"{"tops": [[1,2,3],[0,2,3],[0,1,3],[0,1,2]]}"#);
    assert_eq!(run(&["validate", "--input", s2.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn pipeline_toy_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = l1fill::pipeline::toy_cylinder(7, l1fill::rational::ratio(1, 4));
    let p = write(&dir, "cyl.json", &serde_json::to_string(&cfg.to_json()).unwrap());
    let o = run(&["pipeline", "--input", p.to_str().unwrap(), "--epsilon", "1/8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["trace"]["epsilon"], "1/8");
    assert_eq!(v["trace"]["input_norm"], "6/1");
    assert!(String::from_utf8_lossy(&o.stderr).contains("straighten"));
}

#[test]
fn error_classes_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", "{ not json");
    assert_eq!(run(&["triangulate", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
    let wrong = write(&dir, "wrong.json", r#"{"dim": 2, "vectors": [["1", "0"]]}"#);
    assert_eq!(run(&["triangulate", "--input", wrong.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["triangulate", "--input", "/nonexistent/x.json"]).status.code(), Some(4));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let p = write(&dir, "z2.json", SQUARE);
    let o = run(&["triangulate", "--input", p.to_str().unwrap(), "--output", "/nonexistent/dir/out.json"]);
    assert_eq!(o.status.code(), Some(4));
}
