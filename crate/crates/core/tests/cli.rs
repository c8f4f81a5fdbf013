use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cvmono(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvmono")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn scenario_reports_balanced_equal_loss() {
    let out = cvmono(&["scenario", r#"{"r":2,"eta0":0.5,"etaB":0.5}"#, "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let expected = 0.5 * (1.0 + (-4.0f64).exp());
    assert!((v["D_BA"].as_f64().unwrap() - expected).abs() < 1e-10);
    assert!((v["D_BC"].as_f64().unwrap() - expected).abs() < 1e-10);
}

#[test]
fn scenario_without_squeezing() {
    let v = json(&cvmono(&["scenario", r#"{"r":0,"eta0":0.5}"#, "--json"]));
    assert!((v["D_BA"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["D_BC"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["S_coll"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn scenario_with_closed_form_oracle() {
    let out = cvmono(&["scenario", r#"{"r":1,"eta0":0.5,"nB":1,"nF":1}"#, "--json", "--closed-form"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["report"]["S_coll"].as_f64().unwrap() - 3.0 / 2f64.cosh()).abs() < 1e-10);
    assert_eq!(v["closed_form"]["family"], "thermal");
    assert!(v["max_discrepancy"].as_f64().unwrap() <= 1e-10);

    let text = cvmono(&["scenario", r#"{"r":1,"eta0":0.3}"#, "--closed-form"]);
    assert_eq!(code(&text), 0);
    assert!(String::from_utf8_lossy(&text.stdout).contains("max_discrepancy"));
}

#[test]
fn scenario_reads_files_and_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, r#"{"r": 0.5, "eta0": 0.25, "etaA": 0.9}"#).unwrap();
    assert_eq!(code(&cvmono(&["scenario", path.to_str().unwrap()])), 0);

    let mut child = Command::new(env!("CARGO_BIN_EXE_cvmono"))
        .args(["scenario", "-", "--json"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(br#"{"r": 1, "eta0": 0.5}"#).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(json(&out)["D_BA"].is_number());
}

#[test]
fn scenario_exit_codes() {
    assert_eq!(code(&cvmono(&["scenario", r#"{"r":1,"#])), 2);
    assert_eq!(code(&cvmono(&["scenario", r#"{"r":1,"eta0":0.5,"bogus":1}"#])), 2);
    assert_eq!(code(&cvmono(&["scenario", r#"{"eta0":0.5}"#])), 2);
    assert_eq!(code(&cvmono(&["scenario", r#"{"r":1,"eta0":1.5}"#])), 3);
    assert_eq!(code(&cvmono(&["scenario", r#"{"r":1,"eta0":0.5,"nB":-1}"#])), 3);
    // loss on B and on A together has no analytic family
    let mixed = r#"{"r":1,"eta0":0.5,"etaB":0.5,"etaA":0.5}"#;
    assert_eq!(code(&cvmono(&["scenario", mixed])), 0);
    assert_eq!(code(&cvmono(&["scenario", mixed, "--closed-form"])), 3);
    assert_eq!(code(&cvmono(&["scenario", "/nonexistent/params.json"])), 4);
}

#[test]
fn fig3b_sweep_is_deterministic_and_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        assert_eq!(code(&cvmono(&["sweep", "--preset", "fig3b", "--out", p.to_str().unwrap()])), 0);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));
    let rows = csv(&a);
    assert_eq!(rows.len(), 102);
    assert_eq!(rows[101][0], "1");
    let d_ba = column(&rows, "D_BA");
    assert!((d_ba[100] - (-4.0f64).exp()).abs() < 1e-10);
}

#[test]
fn fig4_sweep_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    assert_eq!(code(&cvmono(&["sweep", "--preset", "fig4", "--out", path.to_str().unwrap()])), 0);
    let rows = csv(&path);
    let x = column(&rows, "eta0");
    let d_sum = column(&rows, "D_sum");
    let d_ba = column(&rows, "D_BA");
    assert_eq!(x[50], 0.5);
    assert!((d_sum[50] - (1.0 + (-4.0f64).exp())).abs() < 1e-10);
    assert!(d_ba.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn fig8b_product_tracks_the_bound() {
    let out = cvmono(&["sweep", "--preset", "fig8b"]);
    assert_eq!(code(&out), 0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig8b.csv");
    std::fs::write(&path, &out.stdout).unwrap();
    let rows = csv(&path);
    let prod = column(&rows, "Ent_prod");
    let bound = column(&rows, "M_B");
    let worst = prod.iter().zip(&bound).map(|(p, m)| p - m).fold(0.0, f64::max);
    assert!(prod.iter().zip(&bound).all(|(p, m)| p >= m));
    // the gap peaks at the endpoints, where one pair is a product state
    assert!(worst < 0.02, "{worst}");
}

#[test]
fn sweep_from_inline_spec() {
    let spec = r#"{"scenario":"ideal","fixed":{"r":1},"sweep_var":"eta0","range":[0.1,0.9,3],"outputs":["S_coll"]}"#;
    let out = cvmono(&["sweep", "--spec", spec]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta0,S_coll");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2], "0.5,0.265802228834");
}

#[test]
fn sweep_exit_codes() {
    assert_eq!(code(&cvmono(&["sweep", "--preset", "fig99"])), 2);
    assert_eq!(code(&cvmono(&["sweep", "--preset", "fig3a", "--out", "/nonexistent/dir/x.csv"])), 4);
    assert_eq!(code(&cvmono(&["sweep", "--spec", r#"{"scenario":"ideal"}"#])), 2);
    assert_eq!(code(&cvmono(&["sweep"])), 2);
}

#[test]
fn fuzz_runs() {
    let out = cvmono(&["fuzz", "--trials", "1", "--seed", "1", "--depth", "0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["trials"], 1);
    let r1 = &v["min_residuals"][0];
    assert_eq!(r1["name"], "r1");
    assert!(r1["value"].as_f64().unwrap() >= 1.0);

    let out = cvmono(&["fuzz", "--trials", "40", "--seed", "3", "--depth", "6"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["min_residuals"].as_array().unwrap().len(), 5);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    assert!(v["min_residuals"][4]["recipe"][0]["op"] == "thermal");
}

#[test]
fn mc_command() {
    let out = cvmono(&["mc", r#"{"r":1,"eta0":0.5}"#, "--count", "200000", "--seed", "7", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
    let table = cvmono(&["mc", r#"{"r":1,"eta0":0.5}"#, "--count", "200000"]);
    assert_eq!(code(&table), 0);
    assert!(String::from_utf8_lossy(&table.stdout).contains("S_coll"));
    assert_eq!(code(&cvmono(&["mc", r#"{"r":1,"eta0":0.5}"#, "--count", "50"])), 2);
}
