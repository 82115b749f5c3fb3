//! End-to-end tests of the command-line surface.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_retarder-forge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn design_rejects_even_family_a() {
    let out = run(&["design", "a", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("odd"), "stderr: {err}");
}

#[test]
fn design_c2_is_deterministic_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("c2a.json");
    let f2 = dir.path().join("c2b.json");
    for f in [&f1, &f2] {
        let out = run(&[
            "design",
            "c",
            "2",
            "--starts",
            "30",
            "--seed",
            "7",
            "-o",
            f.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());

    let sols: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f1).unwrap()).unwrap();
    let arr = sols.as_array().unwrap();
    assert!(!arr.is_empty());
    let hit = arr.iter().any(|s| {
        let angles: Vec<f64> = s["angles_deg"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        retarder_forge::designer::angle_set_distance_deg(&angles, &[30.0, 150.0], true) < 0.1
    });
    assert!(hit, "no solution matches (30, 150): {sols}");
    for s in arr {
        assert!(s["residual_norm"].as_f64().unwrap() <= 1e-10);
    }

    // round trip: design output is directly verifiable
    let out = run(&["verify", f1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn design_reports_no_solution_with_exit_3() {
    // one start on a hard problem will not converge
    let out = run(&["design", "a", "13", "--starts", "1", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_rows_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "good.json",
        r#"[{"family":"a","n":5,"target":"half","angles_deg":[0,52.2,336.7,336.7,52.2]},
            {"family":"b","n":4,"target":"quarter_minus","angles_deg":[0,69.3,318.6,69.3]}]"#,
    );
    let out = run(&["verify", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("a5"));

    let bad = write(
        dir.path(),
        "bad.json",
        r#"[{"family":"a","n":5,"target":"half","angles_deg":[0,62.2,336.7,336.7,52.2]}]"#,
    );
    let out = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    let empty = write(dir.path(), "empty.json", "");
    let out = run(&["verify", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_prints_fidelity() {
    let out = run(&["eval", "--family", "c", "--angles", "30,150"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("fidelity: 1.000000000000"), "{text}");
}

#[test]
fn sweep_single_plate_matches_closed_form() {
    let out = run(&["sweep", "--family", "a", "--angles", "0", "--samples", "101"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi_over_pi,fidelity"));
    for line in lines {
        let mut parts = line.split(',');
        let x: f64 = parts.next().unwrap().parse().unwrap();
        let f: f64 = parts.next().unwrap().parse().unwrap();
        let want = (x * std::f64::consts::PI / 2.0).sin().abs();
        assert!((f - want).abs() < 1e-12, "{line}");
    }
}

#[test]
fn sweep_validates_arguments() {
    let out = run(&["sweep", "--family", "a", "--angles", "0", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["sweep", "--family", "a", "--angles", "0", "--min", "2", "--max", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_wavelength_column() {
    let out = run(&[
        "sweep", "--family", "a", "--angles", "0", "--min", "0.5", "--max", "1.5", "--samples",
        "3", "--wavelength",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("phi_over_pi,fidelity,lambda_over_lambda0\n"));
    // at φ = π the wavelength ratio is 1
    let mid = text.lines().nth(2).unwrap();
    let lam: f64 = mid.rsplit(',').next().unwrap().parse().unwrap();
    assert!((lam - 1.0).abs() < 1e-12, "{mid}");
}

#[test]
fn compare_two_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let single = write(
        dir.path(),
        "single.json",
        r#"{"family":"a","angles_deg":[0]}"#,
    );
    let a5 = write(
        dir.path(),
        "a5.json",
        r#"{"family":"a","angles_deg":[0,52.2,336.7,336.7,52.2]}"#,
    );
    let out = run(&[
        "compare",
        single.to_str().unwrap(),
        a5.to_str().unwrap(),
        "--thresholds",
        "0.99",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,threshold,phi_lo_over_pi,phi_hi_over_pi"));
    let parse = |line: &str| -> (f64, f64) {
        let v: Vec<&str> = line.split(',').collect();
        (v[2].parse().unwrap(), v[3].parse().unwrap())
    };
    let (l1, h1) = parse(lines.next().unwrap());
    let (l2, h2) = parse(lines.next().unwrap());
    assert!(l2 < l1 && h2 > h1, "{text}");
}

#[test]
fn mixed_angle_file_and_target_flag() {
    let dir = tempfile::tempdir().unwrap();
    let b4 = write(
        dir.path(),
        "b4.json",
        r#"{"family":"b","target":"quarter_minus","angles_deg":[0,69.3,318.6,69.3]}"#,
    );
    let out = run(&["eval", b4.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("fidelity: 1.0000000000"), "{}", stdout(&out));
}
