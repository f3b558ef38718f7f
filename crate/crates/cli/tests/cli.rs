use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weylmoyal"))
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn run(args: &[&str], inputs: &[&Path]) -> (Output, Option<Value>) {
    let mut cmd = bin();
    cmd.args(args);
    for p in inputs {
        cmd.arg("--input").arg(p);
    }
    let out = cmd.output().unwrap();
    let report = serde_json::from_slice(&out.stdout).ok();
    (out, report)
}

fn without_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

fn sigma0() -> Value {
    json!({"n": 4, "matrix": [[0,0,1,0],[0,0,0,1],[-1,0,0,0],[0,-1,0,0]]})
}

#[test]
fn darboux_on_sigma0_has_two_pairs() {
    let dir = TempDir::new().unwrap();
    let s = write(dir.path(), "s.json", &sigma0());
    let (out, report) = run(&["darboux"], &[&s]);
    assert!(out.status.success());
    let report = report.unwrap();
    assert_eq!(report["result"]["frame"]["r"], 2);
    assert_eq!(report["result"]["kernel_dim"], 0);

    let half = write(dir.path(), "h.json", &json!({"n": 4, "matrix": [[0,0,0,0],[0,0,1,0],[0,-1,0,0],[0,0,0,0]]}));
    let (out, report) = run(&["darboux"], &[&half]);
    assert!(out.status.success());
    let report = report.unwrap();
    assert_eq!(report["result"]["frame"]["r"], 1);
    assert_eq!(report["result"]["kernel_dim"], 2);
}

#[test]
fn star_with_zero_sigma_is_pointwise() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "f.json", &json!({"type": "gaussian", "center": [0.0, 0.0], "width": [1.0, 1.0]}));
    let g = write(dir.path(), "g.json", &json!({"type": "gaussian", "center": [0.5, -0.2], "width": [1.5, 0.8], "momentum": [1.0, 0.0]}));
    let (out, report) = run(&["star", "--lattice-points", "16", "--box-length", "10"], &[&f, &g]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = report.unwrap();
    let check = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "pointwise_product").unwrap();
    assert!(check["value"].as_f64().unwrap() < 1e-10);

    // Independent pointwise product of the closed forms.
    let result = &report["result"];
    let k = result["lattice"]["points_per_axis"].as_u64().unwrap() as i64;
    let h = 10.0 / k as f64;
    let (re, im) = (result["re"].as_array().unwrap(), result["im"].as_array().unwrap());
    let mut flat = 0;
    for i in 0..k {
        for j in 0..k {
            let (x, y) = ((i - k / 2) as f64 * h, (j - k / 2) as f64 * h);
            let a = (-(x * x + y * y) / 2.0).exp();
            let b = (-((x - 0.5) / 1.5).powi(2) / 2.0 - ((y + 0.2) / 0.8).powi(2) / 2.0).exp();
            let (c, s) = (x.cos(), x.sin());
            assert!((re[flat].as_f64().unwrap() - a * b * c).abs() < 1e-10);
            assert!((im[flat].as_f64().unwrap() - a * b * s).abs() < 1e-10);
            flat += 1;
        }
    }
}

#[test]
fn reports_are_deterministic_per_seed() {
    let first = run(&["verify", "--seed", "5"], &[]).1.unwrap();
    let second = run(&["verify", "--seed", "5"], &[]).1.unwrap();
    assert_eq!(without_timings(first), without_timings(second));
    let a = run(&["orbit", "--seed", "9", "--count", "4"], &[]).1.unwrap();
    let b = run(&["orbit", "--seed", "9", "--count", "4"], &[]).1.unwrap();
    let c = run(&["orbit", "--seed", "10", "--count", "4"], &[]).1.unwrap();
    assert_eq!(without_timings(a.clone()), without_timings(b));
    assert_ne!(a["result"], c["result"]);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", &json!({"n": 2, "matrix": [[0, 1], [1, 0]]}));
    let (out, _) = run(&["darboux"], &[&bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("antisymmetric"));

    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["darboux"], &[&missing]).0.status.code(), Some(2));
    assert_eq!(run(&["darboux"], &[]).0.status.code(), Some(2));
    assert_eq!(run(&["verify", "--lattice-n", "1"], &[]).0.status.code(), Some(2));

    // An impossible tolerance fails checks, which is not an input error.
    let (out, report) = run(&["verify", "--tol", "1e-300"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report.unwrap()["pass"], false);
    let s = write(dir.path(), "s.json", &sigma0());
    assert_eq!(run(&["darboux"], &[&s]).0.status.code(), Some(0));
}

#[test]
fn output_file_and_leaf_to_bundle_pipeline() {
    let dir = TempDir::new().unwrap();
    let leaf_report = dir.path().join("leaf.json");
    let out = bin().args(["leaf", "--count", "6", "--radius", "2"]).arg("--output").arg(&leaf_report).output().unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&leaf_report).unwrap()).unwrap();
    let leaf = write(dir.path(), "sample.json", &report["result"]);
    let (out, report) = run(&["bundle", "--lattice-n", "2"], &[&leaf]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = report.unwrap();
    assert_eq!(report["result"]["points"], 6);
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["name"] == "leaf_rank_constant"));
}

#[test]
fn bundle_with_rank_jump_and_point_at_infinity() {
    let dir = TempDir::new().unwrap();
    let doc = json!({
        "base": {"points": [{"coords": [-1.0]}, {"coords": [0.0]}, {"coords": [1.0]}, {"coords": [2.0], "at_infinity": true}]},
        "fiber_dim": 2,
        "sigma_field": [[[0,-1],[1,0]], [[0,0],[0,0]], [[0,1],[-1,0]], [[0,2],[-2,0]]]
    });
    let b = write(dir.path(), "b.json", &doc);
    let (out, report) = run(&["bundle"], &[&b]);
    assert!(out.status.success());
    let report = report.unwrap();
    assert_eq!(report["result"]["available_points"], json!([0, 1, 2, 3]));
    for name in ["evaluation_homomorphism", "involution", "module_action", "cstar_le_sup_l1", "irrep_multiplicative"] {
        assert!(report["checks"].as_array().unwrap().iter().any(|c| c["name"] == name && c["pass"] == true), "{name}");
    }
}

#[test]
fn quantize_generator_on_the_model() {
    let dir = TempDir::new().unwrap();
    let s = write(dir.path(), "s.json", &json!({"n": 2, "matrix": [[0, 1], [-1, 0]]}));
    let f = write(dir.path(), "f.json", &json!({"type": "gaussian", "center": [0.0, 0.0], "width": [1.0, 1.0]}));
    let (out, report) = run(&["quantize", "--lattice-n", "4"], &[&s, &f]);
    assert!(out.status.success());
    let report = report.unwrap();
    assert_eq!(report["result"]["operator"]["size"], 4);
    assert_eq!(report["result"]["system"]["N"], json!([4]));
    // A real function quantizes to a Hermitian matrix.
    let (re, im) = (&report["result"]["operator"]["re"], &report["result"]["operator"]["im"]);
    for i in 0..4 {
        for j in 0..4 {
            let d_re = re[i][j].as_f64().unwrap() - re[j][i].as_f64().unwrap();
            let d_im = im[i][j].as_f64().unwrap() + im[j][i].as_f64().unwrap();
            assert!(d_re.abs() < 1e-12 && d_im.abs() < 1e-12);
        }
    }
}
