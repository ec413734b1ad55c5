use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const QUAD_36: &str = r#"{"demand":{"mu":1,"sigma2":2},"holding":{"kind":"quadratic","beta":1},
  "ordering":{"k":0,"setup":{"kind":"constant","kappa":36}}}"#;

const QUAD_STEP: &str = r#"{"demand":{"mu":1,"sigma2":2},"holding":{"kind":"quadratic","beta":1},
  "ordering":{"setup":{"kind":"step","breakpoints":[4],"values":[6,48]}}}"#;

fn ssopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssopt")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn solve_constant_fee_instance() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "b.json", QUAD_36);
    let out = dir.path().join("r.json");
    let o = ssopt(&["solve", "--input", s(&input), "--output", s(&out), "--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let r = &v["result"];
    assert!((r["s_star"].as_f64().unwrap() + 4.0).abs() < 1e-7);
    assert!((r["S_star"].as_f64().unwrap() - 2.0).abs() < 1e-7);
    assert!((r["nu_star"].as_f64().unwrap() - 10.0).abs() < 1e-7);
    assert_eq!(r["certificate"]["passed"], true);
    assert_eq!(v["config"]["command"], "solve");
    assert_eq!(v["config"]["numerics"]["seed"], 9);
    assert!(r["tolerances"]["quadrature"]["tol"].is_number());
}

#[test]
fn solve_step_writes_candidate_table() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.json", QUAD_STEP);
    let o = ssopt(&["solve", "--input", s(&input), "--cross-check"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["method"], "step_algorithm");
    assert_eq!(v["result"]["candidate_table"]["rows"].as_array().unwrap().len(), 2);
    assert!(v["result"]["grid_check"]["gap"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn free_small_orders_give_base_stock() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "f.json",
        r#"{"demand":{"mu":1,"sigma2":2},"holding":{"kind":"quadratic","beta":1},
          "ordering":{"setup":{"kind":"step","breakpoints":[4],"values":[0,7]}}}"#,
    );
    let o = ssopt(&["solve", "--input", s(&input)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["method"], "base_stock");
    assert_eq!(v["result"]["s_star"], -1.0);
}

#[test]
fn malformed_and_invalid_input_exit_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", "{\"demand\": {\"mu\": 1,\n \"sigma2\": }");
    let o = ssopt(&["solve", "--input", s(&input)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2 column"));

    let input = write(
        &dir,
        "neg.json",
        r#"{"demand":{"mu":-1,"sigma2":2},"holding":{"kind":"quadratic","beta":1},
          "ordering":{"setup":{"kind":"constant","kappa":-3}}}"#,
    );
    let o = ssopt(&["solve", "--input", s(&input)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("demand") && err.contains("S1"), "{err}");

    let input = write(&dir, "ok.json", QUAD_36);
    assert_eq!(code(&ssopt(&["solve", "--input", s(&input), "--tol", "0.5"])), 2);
    assert_eq!(code(&ssopt(&["solve", "--input", s(&dir.path().join("missing.json"))])), 1);
}

#[test]
fn verify_round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.json", QUAD_STEP);
    let out = dir.path().join("r.json");
    assert_eq!(code(&ssopt(&["solve", "--input", s(&input), "--output", s(&out)])), 0);
    let o = ssopt(&["verify", "--input", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["certificate"]["passed"], true);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let nu = v["result"]["nu_star"].as_f64().unwrap();
    v["result"]["nu_star"] = (nu * 1.05).into();
    let bad = write(&dir, "bad.json", &v.to_string());
    let o = ssopt(&["verify", "--input", s(&bad)]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["certificate"]["passed"], false);
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn sweep_tables_theta() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "b.json", QUAD_36);
    let o = ssopt(&["sweep", "--input", s(&input), "--xi-min", "1", "--xi-max", "10", "--xi-steps", "10"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "xi,theta,s_tilde,S_tilde");
    let r = rows(&text);
    assert_eq!(r.len(), 10);
    let six = r.iter().find(|row| row[0] == "6").unwrap();
    assert!((six[1].parse::<f64>().unwrap() - 10.0).abs() < 1e-8);

    let one = ssopt(&["sweep", "--input", s(&input), "--xi-min", "3", "--xi-max", "3", "--xi-steps", "5"]);
    assert_eq!(rows(&String::from_utf8(one.stdout).unwrap()).len(), 1);
    let empty = ssopt(&["sweep", "--input", s(&input), "--xi-min", "3", "--xi-max", "2"]);
    assert_eq!(code(&empty), 2);

    // θ(0) is infinite under a fixed fee
    let out = dir.path().join("t.csv");
    let o = ssopt(&["sweep", "--input", s(&input), "--xi-min", "0", "--xi-max", "1", "--xi-steps", "2", "--output", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(rows(&std::fs::read_to_string(&out).unwrap())[0][1], "inf");
}

#[test]
fn sweep_shows_the_jump_at_a_breakpoint() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "s.json", QUAD_STEP);
    let o = ssopt(&["sweep", "--input", s(&input), "--xi-min", "3.999", "--xi-max", "4.001", "--xi-steps", "3"]);
    let r = rows(&String::from_utf8(o.stdout).unwrap());
    let theta: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    // at the breakpoint the lower fee applies; just past it the fee rises by 42
    assert!((theta[1] - theta[0]).abs() < 1e-2);
    assert!((theta[2] - theta[1] - 42.0 / 4.001).abs() < 1e-2);
}

#[test]
fn simulate_agrees_with_analytic_cost() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "b.json", QUAD_36);
    let traj = dir.path().join("path.csv");
    let o = ssopt(&["simulate", "--input", s(&input), "--policy", "s=-4,S=2", "--trajectory", s(&traj), "--stride", "1000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!((v["analytic_cost"].as_f64().unwrap() - 10.0).abs() < 1e-9);
    assert!(v["relative_error"].as_f64().unwrap() <= 0.02);
    assert_eq!(v["estimate"]["replications"].as_array().unwrap().len(), 8);
    assert_eq!(v["path"]["seed"], 2024);
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,Z,Y,cumulative_cost");
    assert_eq!(csv.lines().count(), 1 + 1 + 10_000);
}

#[test]
fn simulate_flags_contradictions() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "b.json", QUAD_36);
    let o = ssopt(&[
        "simulate", "--input", s(&input), "--policy", "s=-4,S=2", "--horizon", "100", "--dt", "0.01", "--reps", "2",
        "--sim-tol", "1e-9",
    ]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["consistent"], false);
    let o = ssopt(&["simulate", "--input", s(&input), "--policy", "s=-1", "--horizon", "100", "--dt", "0.01"]);
    assert_eq!(code(&o), 2);
    let o = ssopt(&["simulate", "--input", s(&input), "--horizon", "100", "--dt", "0.1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_reports_one_row_per_bound() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "b.json", QUAD_36);
    let o = ssopt(&[
        "compare", "--input", s(&input), "--policy", "s=-4,S=2", "--m-list", "1,2,4,8", "--horizon", "1000", "--dt",
        "0.01", "--reps", "4",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert_eq!(r["bound"].as_f64().unwrap(), 4.0 * 36.0 / r["m"].as_f64().unwrap());
        assert_eq!(r["holds"], true);
    }
    let bad = ssopt(&["compare", "--input", s(&input), "--m-list", "1.5", "--horizon", "100", "--dt", "0.01"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn thread_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "b.json", QUAD_36);
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_ssopt"))
            .args(["solve", "--input", s(&input), "--no-certificate"])
            .env("SSOPT_THREADS", v)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("0")), 2);
    assert_eq!(code(&run("many")), 2);
}
