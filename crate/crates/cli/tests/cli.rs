use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn transfer(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_transfer"));
    cmd.env_remove("TRANSFER_CACHE_DIR").env_remove("TRANSFER_CACHE_PARANOID");
    match cache {
        Some(dir) => cmd.arg("--cache-dir").arg(dir),
        None => cmd.arg("--no-cache"),
    };
    cmd.args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn verify_bernoulli_passes() {
    let o = transfer(&["verify", "--suite", "bernoulli"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["status"], "pass");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["witness"].is_null()));
}

#[test]
fn verify_tate_reports_failures_with_witnesses() {
    let o = transfer(&["verify", "--suite", "tate", "--prec", "6"], None);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["status"], "fail");
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|c| !c["witness"].is_null()));
    // Every check ran, not just the first failing one.
    assert_eq!(v["total"], 7);
}

#[test]
fn finv_report_schema() {
    let o = transfer(&["finv", "--s", "3", "--t", "1"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for key in ["params", "representative", "symmetric_representative", "fprime", "difference_constant", "reduced"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["difference_constant"], true);
    for p in ["5", "7", "11", "13"] {
        assert_eq!(v["reduced"][p]["trivial"], true);
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&transfer(&["--frobnicate"], None)), 2);
    assert_eq!(code(&transfer(&["verify", "--suite", "nonsense"], None)), 2);
    assert_eq!(code(&transfer(&["verify", "--suite", ""], None)), 2);
}

#[test]
fn config_validation() {
    assert_eq!(code(&transfer(&["--primes", "3", "verify", "--suite", "relate"], None)), 2);
    assert_eq!(code(&transfer(&["--primes", "9", "verify", "--suite", "relate"], None)), 2);
    assert_eq!(code(&transfer(&["--prec", "0", "fgl", "--law", "additive"], None)), 2);
    // Q >= N/2 + 2 for anything that expands modular forms.
    assert_eq!(code(&transfer(&["--qprec", "5", "finv", "--s", "1", "--t", "1"], None)), 2);
    assert_eq!(code(&transfer(&["--gamma-for", "5=7", "fprime", "--s", "1", "--t", "1"], None)), 2);
}

#[test]
fn output_is_deterministic() {
    let a = transfer(&["--prec", "8", "fgl", "--law", "elliptic"], None);
    let b = transfer(&["--prec", "8", "fgl", "--law", "elliptic"], None);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let a = transfer(&["verify", "--suite", "congruence"], None);
    let b = transfer(&["verify", "--suite", "congruence"], None);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--prec", "6", "transfer", "--cocycle", "K", "--left", "multiplicative", "--right", "elliptic", "--primitives", "2"];
    let plain = transfer(&args, None);
    let first = transfer(&args, Some(dir.path()));
    let second = transfer(&args, Some(dir.path()));
    assert_eq!(code(&plain), 0, "{}", String::from_utf8_lossy(&plain.stderr));
    assert_eq!(plain.stdout, first.stdout);
    assert_eq!(plain.stdout, second.stdout);
    let stats = json(&transfer(&["cache", "stats"], Some(dir.path())));
    assert_eq!(stats["entries"], 1);
}

#[test]
fn corrupted_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--prec", "5", "bernoulli", "--law", "elliptic"];
    let good = transfer(&args, Some(dir.path()));
    let entry = fs::read_dir(dir.path()).unwrap().flatten().map(|e| e.path()).find(|p| p.extension().is_some_and(|x| x == "json")).unwrap();
    fs::write(&entry, b"{\"key\": 1, \"payl").unwrap();
    let again = transfer(&args, Some(dir.path()));
    assert_eq!(code(&again), 0);
    assert_eq!(good.stdout, again.stdout);
    assert!(String::from_utf8_lossy(&again.stderr).contains("warning"));
    // The entry was overwritten with a valid one.
    let stored: Value = serde_json::from_str(&fs::read_to_string(&entry).unwrap()).unwrap();
    assert!(stored.get("payload").is_some());
    let cleared = json(&transfer(&["cache", "clear"], Some(dir.path())));
    assert_eq!(cleared["removed"], 1);
}

#[test]
fn congruence_exit_codes() {
    let good = transfer(&["congruence", "--component", "4:1/240*c4", "--component", "0:-1/240", "--prime", "5"], None);
    assert_eq!(code(&good), 0, "{}", String::from_utf8_lossy(&good.stderr));
    let bad = transfer(&["congruence", "--component", "4:1/5*c4", "--prime", "5"], None);
    assert_eq!(code(&bad), 1);
    let v = json(&bad);
    assert_eq!(v["integrality"]["5"]["first_violation"]["exponent"], 0);
    assert_eq!(v["integrality"]["5"]["first_violation"]["coeff"], "1/5");

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("dc.json");
    let dc = r#"{"components": [{"weight": 4, "form": [{"monomial": "c4", "coeff": "1/240"}]},
                                {"weight": 0, "form": [{"monomial": "1", "coeff": "-1/240"}]}], "qprec": 30}"#;
    fs::write(&input, dc).unwrap();
    let from_file = transfer(&["congruence", "--input", input.to_str().unwrap(), "--prime", "7"], None);
    assert_eq!(code(&from_file), 0, "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(json(&from_file)["qprec"], 30);
    assert_eq!(code(&transfer(&["congruence", "--input", "/nonexistent.json"], None)), 2);
}

#[test]
fn json_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fp.json");
    let o = transfer(&["fprime", "--s", "1", "--t", "1", "--prime", "5", "--json", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let r = &v["reports"][0];
    assert_eq!(r["agree"], true);
    assert_eq!(r["closed_form"][0]["coeff"], "-1/180");
}
