use std::collections::BTreeSet;
use std::process::Command;

use hormander_cli::{run, EXIT_NUMERIC, EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE, OPERATIONS, SUBCOMMANDS};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hormander").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn call_json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, EXIT_OK, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

fn tmp(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("hormander-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn fredholm_m2_dimensions() {
    let v = call_json(&["bvp", "fredholm", "--m", "2"]);
    assert_eq!(v["kernel_dim"], 3);
    assert_eq!(v["cokernel_dim"], 3);
    assert_eq!(v["index"], 0);
    assert_eq!(v["command"], "bvp fredholm");
}

#[test]
fn fredholm_with_bases() {
    let v = call_json(&["bvp", "fredholm", "--m", "3", "--k", "4", "--basis"]);
    assert_eq!(v["kernel_basis"].as_array().unwrap().len(), 5);
    assert_eq!(v["index"], 0);
    let v = call_json(&["bvp", "fredholm", "--m", "2", "--k", "2", "--basis"]);
    assert_eq!(v["adjoint_kernel_basis"].as_array().unwrap().len(), 3);
}

#[test]
fn embed_boundary_case_diverges() {
    let v = call_json(&["ro", "embed", "--kind", "power", "--s", "1", "--p", "0", "--n", "2"]);
    assert_eq!(v["status"], "diverges");
}

#[test]
fn embed_convergent_case() {
    let v = call_json(&["ro", "embed", "--kind", "power", "--s", "3", "--p", "1", "--n", "2"]);
    assert_eq!(v["status"], "converges");
}

#[test]
fn index_power_matches_analytic() {
    let v = call_json(&["ro", "index", "--kind", "power", "--s", "2.5"]);
    let est = &v["estimate"]["pair"];
    assert!((est["sigma0"].as_f64().unwrap() - 2.5).abs() < 1e-6);
    assert!((est["sigma1"].as_f64().unwrap() - 2.5).abs() < 1e-6);
    assert_eq!(v["analytic"]["sigma0"], 2.5);
}

#[test]
fn weight_json_and_negative_exponents() {
    let v = call_json(&["ro", "check", "--weight", r#"{"kind":"power_log","s":1,"r":[-3,2]}"#, "--at", "10"]);
    assert_eq!(v["membership"]["ok"], true);
    let v = call_json(&["ro", "check", "--kind", "power-log", "--s", "0", "--r", "-1,2", "--at", "100"]);
    assert!(v["values"][0]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn classical_criterion_runs() {
    let v = call_json(&[
        "ro",
        "classical",
        "--phi1",
        r#"{"kind":"power","s":4}"#,
        "--phi2",
        r#"{"kind":"power","s":4}"#,
    ]);
    assert_eq!(v["interior_ok"]["status"], "converges", "{v}");
    assert_eq!(v["boundary_ok"]["status"], "converges", "{v}");
    assert_eq!(v["precondition_ok"], true);
}

#[test]
fn norm_of_single_mode_file() {
    let p = tmp("mode.csv", "k,re,im\n2,1,0\n");
    let path = p.to_str().unwrap();
    let v = call_json(&["norm", "--kind", "power", "--s", "1", "--input", path]);
    // ⟨2⟩ = sqrt(5), Parseval factor 2π
    let expected = (2.0 * std::f64::consts::PI).sqrt() * 5f64.sqrt();
    assert!((v["hnorm"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn norm_extras() {
    let v = call_json(&[
        "norm", "--kind", "power", "--s", "2", "--k", "8", "--random", "--eta", r#"{"kind":"power","s":1}"#,
        "--derivative", "1", "--xi", "3,-4",
    ]);
    assert!((v["smoothed_modulus"].as_f64().unwrap() - 26f64.sqrt()).abs() < 1e-12);
    assert!(v["derivative_multiplier_bound"].as_f64().unwrap() <= 1.0);
    assert!(v["hnorm"].as_f64().unwrap() > 0.0);
    assert!(v["embedding"].is_object());
}

#[test]
fn interp_commands() {
    let v = call_json(&["interp", "psi", "--kind", "power", "--s", "1.5", "--s0", "1", "--s1", "2"]);
    assert_eq!(v["pseudoconcavity"]["ok_on_sample"], true);
    let v = call_json(&["interp", "verify", "--kind", "power", "--s", "1.5", "--s0", "1", "--s1", "2", "--k", "16"]);
    assert!(v["max_relative_difference"].as_f64().unwrap() < 1e-12);
}

#[test]
fn bvp_solve_roundtrip() {
    let problem = r#"{"m":2,"K":2,"R":4,
        "f":{"modes":[{"k":0,"radial":[1.0,1.0,1.0,1.0]}]},
        "g":{"coeffs":[[2,1.0,0.0]]}}"#;
    let p = tmp("problem.json", problem);
    let v = call_json(&["bvp", "solve", "--input", p.to_str().unwrap(), "--norms", r#"[{"kind":"interior","s":1}]"#]);
    assert_eq!(v["index"], 0);
    assert_eq!(v["operator_residual_ok"], true);
    assert!(v["norms"]["interior:H^1"].as_f64().unwrap() > 0.0);
}

#[test]
fn bvp_probes() {
    let v = call_json(&["bvp", "apriori", "--trials", "3", "--k", "8"]);
    assert!(v["max_ratio"].as_f64().unwrap().is_finite());
    let v = call_json(&["bvp", "regularity", "--ks", "8,16", "--ladder", "6,7"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn green_verify_random() {
    let v = call_json(&["green", "verify", "--k", "4", "--trials", "2", "--radial-points", "32", "--angular-points", "32", "--adjoint"]);
    assert_eq!(v["ok"], true);
    assert_eq!(v["adjoint"].as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["bvp", "nonsense"]).0, EXIT_USAGE);
    assert_eq!(call(&["ro", "index", "--bogus-flag"]).0, EXIT_USAGE);
    assert_eq!(call(&["bvp", "apriori", "--s", "2", "--trials", "1"]).0, EXIT_PRECONDITION);
    assert_eq!(call(&["ro", "check", "--kind", "power"]).0, EXIT_PRECONDITION);
    assert_eq!(call(&["bvp", "solve", "--input", "/nonexistent/problem.json"]).0, EXIT_PRECONDITION);
    let (code, _, err) = call(&["ro", "check", "--kind", "power", "--s", "400", "--at", "1e300", "--tmax", "10"]);
    assert_eq!(code, EXIT_NUMERIC, "{err}");
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["--seed", "7", "bvp", "apriori", "--trials", "4", "--k", "8", "--threads", "2"];
    let (_, a, _) = call(&args);
    let (_, b, _) = call(&args);
    assert_eq!(a, b);
    let (_, c, _) = call(&["--seed", "8", "bvp", "apriori", "--trials", "4", "--k", "8"]);
    assert_ne!(a, c);
}

#[test]
fn csv_output() {
    let (code, out, _) = call(&["--format", "csv", "bvp", "fredholm", "--m", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("key,value\n"));
    assert!(out.lines().any(|l| l == "index,0"));
}

#[test]
fn output_path_is_written() {
    let p = std::env::temp_dir().join(format!("hormander-out-{}.json", std::process::id()));
    let (code, out, _) = call(&["--output", p.to_str().unwrap(), "bvp", "fredholm", "--m", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["kernel_dim"], 7);
}

#[test]
fn every_operation_maps_to_a_parsable_subcommand() {
    let names: BTreeSet<&str> = OPERATIONS.iter().map(|(op, _)| *op).collect();
    assert_eq!(names.len(), OPERATIONS.len(), "duplicate operation");
    assert_eq!(names.len(), 27);
    for (op, sub) in OPERATIONS {
        assert!(SUBCOMMANDS.contains(sub), "{op} -> {sub}");
    }
    for sub in SUBCOMMANDS {
        let mut args: Vec<&str> = sub.split(' ').collect();
        args.push("--help");
        assert_eq!(call(&args).0, EXIT_OK, "{sub}");
    }
}

#[test]
fn config_file_via_environment() {
    let cfg = tmp("config.json", r#"{"seed": 11, "format": "csv"}"#);
    let bin = env!("CARGO_BIN_EXE_hormander");
    let out = Command::new(bin)
        .args(["bvp", "fredholm", "--m", "2"])
        .env("HORMANDER_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "seed,11"), "{text}");
    // flags win over the file
    let out = Command::new(bin)
        .args(["--seed", "3", "--format", "json", "bvp", "fredholm", "--m", "2"])
        .env("HORMANDER_CONFIG", &cfg)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 3);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hormander");
    let st = Command::new(bin).arg("--no-such-flag").output().unwrap();
    assert_eq!(st.status.code(), Some(64));
    let st = Command::new(bin).args(["bvp", "fredholm", "--m", "2"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}
