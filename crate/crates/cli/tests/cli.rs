use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_vcycle")).args(args).arg("-o").arg(out).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn manifest_is_complete(dir: &Path) {
    let m = json(&dir.join("manifest.json"));
    let files = m["files"].as_array().unwrap();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = files.iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    listed.sort();
    assert_eq!(listed, on_disk);
    for f in files {
        let bytes = std::fs::read(dir.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    assert!(m["config"].is_object());
}

#[test]
fn algebra_writes_the_basis() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(&["algebra", "--germ=fermat:3", "--n=2"], dir.path());
    assert_eq!(code, 0);
    let b = json(&dir.path().join("basis.json"));
    assert_eq!(b["mu"], 4);
    assert_eq!(b["basis"], serde_json::json!(["x1*x2", "x1", "x2", "1"]));
    assert!(b["deformation"].as_str().unwrap().contains("l4"));
    manifest_is_complete(dir.path());

    let (code, _) = run(&["algebra", "--germ=x1^3+x2^2", "--n=2"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(json(&dir.path().join("basis.json"))["mu"], 2);
    let (code, _) = run(&["algebra", "--germ=x1^2+x2^2", "--n=2"], dir.path());
    assert_eq!(code, 0);
    assert_eq!(json(&dir.path().join("basis.json"))["mu"], 1);
}

#[test]
fn reduce_matches_the_relation_example() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["reduce", "--germ=fermat:3", "--n=2", "--lambda=0,0,0,-1"];
    let class = |form: &str| {
        let arg = format!("--reduce.form={form}");
        let mut args = common.to_vec();
        args.push(&arg);
        let (code, err) = run(&args, dir.path());
        assert_eq!(code, 0, "{err}");
        json(&dir.path().join("reduction.json"))
    };
    let a = class("x1^5");
    let b = class("3*x1^2*x2^3");
    assert_eq!(a["normal_form"], b["normal_form"]);
    let c = class("x1*x2");
    assert_eq!(c["normal_form_rendered"], "x1*x2");
    let certs = c["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 4);
    assert!(certs.iter().all(|cert| cert["full_rank"] == true));
}

#[test]
fn reduce_rejects_zero_constant_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["reduce", "--germ=fermat:3", "--n=2", "--lambda=0,0,0,0"], dir.path());
    assert_ne!(code, 0);
    assert!(!err.is_empty());
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["verify", "--lambda=-1,0"], dir.path()).0, 1);
    assert_eq!(run(&["verify", "--grid.spacing=0.1"], dir.path()).0, 1);
    assert_eq!(run(&["algebra", "--germ=x1^2+("], dir.path()).0, 1);
    assert_eq!(run(&["frobnicate"], dir.path()).0, 1);
    assert_eq!(run(&["potential", "--n=2", "--germ=fermat:3", "--lambda=0,0,0,-1"], dir.path()).0, 1);
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["--config", missing.to_str().unwrap(), "algebra"], dir.path()).0, 1);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"germ": "fermat:4", "n": 1, "lambda": [0, 0, -1]}"#).unwrap();
    let out = dir.path().join("out");
    let (code, err) = run(&["--config", cfg.to_str().unwrap(), "algebra", "--n=2"], &out);
    assert_eq!(code, 0, "{err}");
    assert_eq!(json(&out.join("basis.json"))["mu"], 9);
    assert_eq!(json(&out.join("manifest.json"))["config"]["germ"], "fermat:4");
}

#[test]
fn verify_reports_an_empty_domain() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["verify", "--lambda=1", "--grid.h=0.1"], dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("empty domain"), "{err}");
    let c = json(&dir.path().join("certificate.json"));
    assert_eq!(c["failure"], "empty domain");
    manifest_is_complete(dir.path());
}

#[test]
fn verify_morse_ball() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["verify", "--lambda=-1", "--grid.h=0.047", "--eval.num_points=8"], dir.path());
    assert_eq!(code, 0, "{err}");
    let c = json(&dir.path().join("certificate.json"));
    assert_eq!(c["verdict"], true);
    assert_eq!(c["rank"], 1);
    let s = json(&dir.path().join("separation.json"));
    assert_eq!(s["all_positive"], true);
    manifest_is_complete(dir.path());
}

#[test]
fn potential_of_the_ball_decays_like_a_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["potential", "--lambda=-1"], dir.path());
    assert_eq!(code, 0, "{err}");
    for row in csv_rows(&dir.path().join("potential.csv")) {
        let r = (row[0] * row[0] + row[1] * row[1] + row[2] * row[2]).sqrt();
        let scaled = row[3] * r;
        assert!((scaled - 4.0 * PI / 3.0).abs() / (4.0 * PI / 3.0) < 0.01, "{scaled}");
    }
    let m = json(&dir.path().join("moments.json"));
    assert!(m["entries"].as_array().unwrap().len() >= 4);
    assert!(std::fs::read_to_string(dir.path().join("mesh.obj")).unwrap().contains("g comp_1_depth_1_sign_+1"));
    manifest_is_complete(dir.path());
}

#[test]
fn zero_density_gives_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["potential", "--lambda=-1", "--psi=0", "--grid.h=0.1"], dir.path());
    assert_eq!(code, 0, "{err}");
    assert!(csv_rows(&dir.path().join("potential.csv")).iter().all(|r| r[3] == 0.0));
}

#[test]
fn shell_preset_matches_difference_of_balls() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["potential", "--germ=shell:1,2", "--grid.radius=2.5"], dir.path());
    assert_eq!(code, 0, "{err}");
    for row in csv_rows(&dir.path().join("potential.csv")) {
        let r = (row[0] * row[0] + row[1] * row[1] + row[2] * row[2]).sqrt();
        let exact = 4.0 * PI / 3.0 * (8.0 - 1.0) / r;
        assert!((row[3] - exact).abs() / exact < 0.01, "{} vs {exact}", row[3]);
    }
    let (code, _) = run(&["potential", "--germ=shell:1,2", "--grid.radius=1.5"], dir.path());
    assert_eq!(code, 1);
}

#[test]
fn levelset_reports_nesting() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["levelset", "--germ=shell", "--grid.radius=2.5", "--grid.h=0.08"], dir.path());
    assert_eq!(code, 0, "{err}");
    let l = json(&dir.path().join("levelset.json"));
    let mut labels: Vec<(u64, i64)> = l["components"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["depth"].as_u64().unwrap(), c["orientation_sign"].as_i64().unwrap()))
        .collect();
    labels.sort();
    assert_eq!(labels, vec![(1, 1), (2, -1)]);
}

#[test]
fn recover_from_an_explicit_start() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["recover", "--lambda=-1", "--recover.lambda0=-1.2", "--grid.h=0.047"], dir.path());
    assert_eq!(code, 0, "{err}");
    let r = json(&dir.path().join("recovery.json"));
    assert_eq!(r["converged"], true);
    assert!(r["error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run(&["jacobian", "--lambda=-1", "--grid.h=0.1"], dir.path());
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("jacobian.json")).unwrap();
    assert!(text.contains("-1.0000000000000000e0"), "{text}");
}
