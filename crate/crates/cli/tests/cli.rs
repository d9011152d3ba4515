use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_radialdpp"));
    c.env_remove("RADIALDPP_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("radialdpp-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn missing_ensemble_is_usage_error() {
    assert_eq!(run(&["clt", "--R", "10"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["vf", "--ensemble", "ginibre", "--bogus"]).status.code(), Some(2));
}

#[test]
fn bad_parameters_are_validation_errors() {
    assert_eq!(run(&["vf", "--ensemble", "hyperbolic"]).status.code(), Some(3));
    assert_eq!(run(&["vf", "--ensemble", "ginibre", "--alpha", "1"]).status.code(), Some(3));
    assert_eq!(run(&["vf", "--ensemble", "hyperbolic", "--alpha=-1"]).status.code(), Some(3));
    assert_eq!(run(&["clt", "--ensemble", "ginibre", "--R", "10", "--reps", "5"]).status.code(), Some(3));
    assert_eq!(run(&["clt", "--ensemble", "ginibre", "--R", "20,10"]).status.code(), Some(3));
    assert_eq!(run(&["moments", "--ensemble", "ginibre", "--R", "10", "--eps", "2"]).status.code(), Some(3));

    let bad = scratch("unsorted.json");
    fs::write(&bad, r#"{"breakpoints":[1,0],"values":[1]}"#).unwrap();
    assert_eq!(run(&["vf", "--ensemble", "ginibre", "--f", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn vf_indicator_values() {
    let out = run(&["vf", "--ensemble", "ginibre"]);
    assert!(out.status.success());
    let v = json(&out)["V_f"].as_f64().unwrap();
    // (1 - e^{-1} + 2 ∫_0^1 √π t erfc t dt ...) evaluated independently: 1.02787008...
    assert!((v - 1.027870083775).abs() < 1e-9, "{v}");

    let out = run(&["vf", "--ensemble", "hyperbolic", "--alpha", "1"]);
    let v = json(&out)["V_f"].as_f64().unwrap();
    assert!((v - 2.64251614).abs() < 1e-6, "{v}");
}

#[test]
fn kernel_check_passes() {
    let out = run(&["kernel-check", "--alpha", "0.5,1,3", "--xgrid=-4:4:9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["per_alpha"].as_array().unwrap().len(), 3);
    assert_eq!(run(&["kernel-check", "--xgrid", "1:0:3"]).status.code(), Some(3));
}

#[test]
fn json_floats_round_trip() {
    let out = run(&["moments", "--ensemble", "hyperbolic", "--alpha", "1.5", "--R", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("e0") || text.contains("e1"));
    let v = json(&out);
    let mean = v["mean_exact"].as_f64().unwrap();
    let reprinted = format!("{mean:.16e}");
    assert!(text.contains(&reprinted));
    assert!(v["var_exact"].as_f64().unwrap() > 0.0);
}

#[test]
fn moments_csv_has_one_row_per_radius() {
    let out = run(&["moments", "--ensemble", "ginibre", "--R", "5,10,20", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "R,a_R,mean_exact,var_exact,mean_asym,var_asym,trunc_mass");
    assert_eq!(lines.len(), 4);
}

#[test]
fn experiment_output_is_reproducible_and_thread_independent() {
    let args = ["clt", "--ensemble", "ginibre", "--R", "30", "--reps", "200", "--seed", "0x1234"];
    let a = run(&args);
    let b = bin().args(args).env("RADIALDPP_THREADS", "1").output().unwrap();
    let c = bin().args(args).env("RADIALDPP_THREADS", "3").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v = json(&a);
    assert_eq!(v["plan"]["seed"].as_u64(), Some(0x1234));
    assert_eq!(v["report"]["levels"][0]["replicates"].as_u64(), Some(200));
}

#[test]
fn plan_file_and_rows_output() {
    let plan = scratch("plan.json");
    fs::write(
        &plan,
        r#"{"ensemble":{"kind":"hyperbolic","alpha":1.0},"f":{"breakpoints":[0,1],"values":[1]},
            "scaling":{"family":"fixed"},"R_ladder":[3,4],"replicates":150,"seed":7}"#,
    )
    .unwrap();
    let out_path = scratch("clt.json");
    let rows = scratch("rows.csv");
    let out = run(&["clt", "--plan", plan.to_str().unwrap(), "--out", out_path.to_str().unwrap(), "--rows", rows.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["report"]["levels"].as_array().unwrap().len(), 2);
    for i in 0..2 {
        let p = PathBuf::from(format!("{}.R{i}", rows.display()));
        let text = fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().count(), 151);
    }
    assert!(PathBuf::from(format!("{}.log", out_path.display())).exists());

    let unknown = scratch("unknown.json");
    fs::write(&unknown, r#"{"ensemble":{"kind":"ginibre"},"f":{"breakpoints":[0,1],"values":[1]},"scaling":{"family":"fixed"},"R_ladder":[3],"replicates":150,"extra":1}"#).unwrap();
    assert_eq!(run(&["clt", "--plan", unknown.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn strict_mode_reports_gof_failure() {
    // At R = 1 the count is a small integer and far from normal.
    let args = ["clt", "--ensemble", "ginibre", "--R", "1", "--reps", "2000"];
    assert_eq!(run(&args).status.code(), Some(0));
    let strict = run(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(4));
    assert_eq!(json(&strict)["report"]["pass"], Value::Bool(false));

    let exploratory = run(&[&args[..], &["--strict", "--exploratory"]].concat());
    assert_eq!(exploratory.status.code(), Some(0));
    assert!(json(&exploratory)["report"]["pass"].is_null());

    let mismatch = run(&["clt", "--ensemble", "ginibre", "--R", "400", "--scaling", "power", "--p", "0.5", "--reps", "400"]);
    assert_eq!(mismatch.status.code(), Some(3));
}

#[test]
fn sample_respects_window() {
    let out = run(&["sample", "--ensemble", "ginibre", "--lo", "3", "--hi", "4", "--reps", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    let reps = v.as_array().unwrap();
    assert_eq!(reps.len(), 3);
    for r in reps {
        for p in r["points"].as_array().unwrap() {
            let x = p["value"].as_f64().unwrap();
            assert!((3.0..4.0).contains(&x), "{x}");
        }
    }
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("clt"));
}
