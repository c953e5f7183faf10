//! End-to-end tests against the compiled binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn epkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn approx(v: &Value, expected: f64, tol: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= tol
}

#[test]
fn construct_reports_reference_values() {
    let out = epkit(&["construct", "--e", "0,0", "1,0", "3,0", "--signs", "+", "-"]);
    let json = stdout_json(&out);
    assert!(approx(&json["s2"][0], 0.1924500897, 1e-9));
    assert!(approx(&json["s2"][1], 0.0, 1e-12));
    assert!(approx(&json["s3"][1], -1.5396007178, 1e-9));
    // stdout carries 12 significant digits; parsing back costs half an ulp
    assert!(approx(&json["E_c"][0], 4.0 / 3.0, 1e-11));
    assert!(approx(&json["a1_abs"], 0.8399473, 1e-6));
    assert_eq!(json["validated"], Value::Bool(true));
    assert!(approx(&json["psi_ep"][0][1], -1.1547005, 1e-6));
    assert!(approx(&json["psi_ep"][2][0], 1.0, 1e-12));
}

#[test]
fn classify_default_signs_is_right_handed() {
    let out = epkit(&[
        "classify", "--e", "0,0", "1,0", "3,0", "--lambda", "0.001,0",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["handedness"], Value::String("Right".into()));
    assert_eq!(
        json["width"]["variant"],
        Value::String("MiddleBroadest".into())
    );
    assert!(approx(&json["helix"][0][2], 1.261, 2e-3));
    assert!(approx(&json["helix"][1][0], -0.5, 1e-9));
    assert!(approx(&json["helix"][2][1], -0.866, 1e-3));
}

#[test]
fn verify_builtins_pass() {
    let out = epkit(&["verify", "--model", "e013"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let out = epkit(&["verify", "--model", "ep2"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn sweep_is_deterministic_and_well_shaped() {
    let args = ["sweep", "--e", "0,0", "1,0", "3,0"];
    let first = epkit(&args);
    let second = epkit(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "byte-identical reruns");
    let text = String::from_utf8(first.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda_re,lambda_im,sheet,E_re,E_im,t_norm_abs,overlap_abs"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9 * 3, "radius-major, sheet-minor rows");
    // sheet column cycles 1,2,3
    for (k, row) in rows.iter().enumerate() {
        let sheet: usize = row.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(sheet, k % 3 + 1);
    }
}

#[test]
fn fit_roundtrips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = epkit(&[
        "sweep",
        "--e",
        "0,0",
        "1,0",
        "3,0",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let direct = stdout_json(&epkit(&["fit", "--e", "0,0", "1,0", "3,0"]));
    let via_csv = stdout_json(&epkit(&["fit", "--csv", csv_path.to_str().unwrap()]));

    for quantity in ["norm", "overlap"] {
        let a = direct[quantity]["exponent"].as_f64().unwrap();
        let b = via_csv[quantity]["exponent"].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-12, "{quantity}: {a} vs {b}");
    }
    for sheet in 0..3 {
        let a = direct["energy"][sheet]["exponent"].as_f64().unwrap();
        let b = via_csv["energy"][sheet]["exponent"].as_f64().unwrap();
        // the CSV path re-estimates E_c from 12-digit energies; the ~3e-12
        // centroid shift moves log-splittings near the smallest radius by
        // ~3e-10, so the energy fits agree to 1e-9 rather than 1e-12
        assert!((a - b).abs() <= 1e-9, "energy sheet {sheet}: {a} vs {b}");
        assert!((a - 1.0 / 3.0).abs() <= 0.005);
    }
}

#[test]
fn monodromy_single_loop_three_cycle() {
    let json = stdout_json(&epkit(&[
        "monodromy",
        "--e",
        "0,0",
        "1,0",
        "3,0",
        "--center",
        "0,0",
        "--radius",
        "1e-3",
        "--loops",
        "1",
    ]));
    let perm: Vec<usize> = json["permutation"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    assert_eq!(json["loops"], Value::from(1));
    // order-3 permutation: not the identity, cube is
    assert_ne!(perm, vec![1, 2, 3]);
    let mut composed = vec![1usize, 2, 3];
    for _ in 0..3 {
        composed = composed.iter().map(|&j| perm[j - 1]).collect();
    }
    assert_eq!(composed, vec![1, 2, 3]);
}

#[test]
fn locate_ep2_from_cli() {
    let json = stdout_json(&epkit(&[
        "locate",
        "--order",
        "2",
        "--model",
        "ep2",
        "--lambda0",
        "0,0.4",
    ]));
    assert!(approx(&json["lambda_c"][0], 0.0, 1e-8));
    assert!(approx(&json["lambda_c"][1], 0.5, 1e-8));
    assert!(approx(&json["E_c"][0], 0.5, 1e-8));
    assert_eq!(json["order"], Value::from(2));
    assert_eq!(json["validated"], Value::Bool(true));
}

#[test]
fn locate_ep3_from_perturbed_couplings() {
    let json = stdout_json(&epkit(&[
        "locate",
        "--order",
        "3",
        "--e",
        "0,0",
        "1,0",
        "3,0",
        "--lambda0",
        "0,0",
        "--p0",
        "0.2021,0,0,1.6166",
    ]));
    assert_eq!(json["validated"], Value::Bool(true));
    assert_eq!(json["order"], Value::from(3));
    assert!(json["final_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn helix_emits_points_and_curve() {
    let out = epkit(&["helix", "--e", "0,0", "1,0", "3,0", "--lambda", "0.001,0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,z,kind");
    assert_eq!(lines.len(), 1 + 3 + 60);
    assert!(lines[1..=3].iter().all(|l| l.ends_with(",point")));
    assert!(lines[4..].iter().all(|l| l.ends_with(",curve")));
}

#[test]
fn config_file_drives_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{
            "model": {"special": {"e": [[0,0],[1,0],[3,0]], "signs": [1,-1]}},
            "sweep": {"center": [0,0], "direction": [1,0],
                      "radii": {"min": 1e-5, "max": 1e-3, "count": 5}}
        }"#,
    )
    .unwrap();
    let out = epkit(&["sweep", "--config", config_path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 3);
}

#[test]
fn malformed_input_exits_two() {
    let out = epkit(&[
        "classify",
        "--e",
        "zero,zero",
        "1,0",
        "3,0",
        "--lambda",
        "1,0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = epkit(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed config"));
}

#[test]
fn numerical_error_exits_three() {
    // λ at the EP itself: on-singularity
    let out = epkit(&["classify", "--e", "0,0", "1,0", "3,0", "--lambda", "0,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[on-singularity]"));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("construct.json");
    let to_file = epkit(&[
        "construct",
        "--e",
        "0,0",
        "1,0",
        "3,0",
        "--signs",
        "+",
        "-",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    let from_stdout = epkit(&["construct", "--e", "0,0", "1,0", "3,0", "--signs", "+", "-"]);
    assert_eq!(std::fs::read(&path).unwrap(), from_stdout.stdout);
    assert!(Path::new(&path).exists());
}
