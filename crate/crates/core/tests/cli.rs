use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn feasilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feasilab"))
        .args(args)
        .env_remove("FEASILAB_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn list_shows_every_bundled_scenario() {
    let out = feasilab(&["list"]);
    assert!(out.status.success());
    let names: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap().to_owned())
        .collect();
    for want in [
        "trapezoids",
        "unbounded-wedge",
        "disc-vs-halfplane",
        "disjoint-rectangles",
    ] {
        assert!(
            names.iter().any(|n| n == want),
            "{want} missing from {names:?}"
        );
    }
}

#[test]
fn run_writes_the_output_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = feasilab(&[
        "run",
        "--scenario",
        "trapezoids",
        "--iters",
        "200",
        "--out",
        out_dir,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    assert_eq!(report["scenario"], "trapezoids");
    assert_eq!(report["passed"], true);

    let run_dir = Path::new(report["dir"].as_str().unwrap());
    assert!(run_dir.starts_with(dir.path().join("trapezoids")));
    for file in ["trace.csv", "verdict.json", "regularity.json"] {
        assert!(run_dir.join(file).is_file(), "{file} not written");
    }
    let verdict: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["scenario"], "trapezoids");
    let trace = fs::read_to_string(run_dir.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
}

#[test]
fn start_override_accepts_negative_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let out = feasilab(&[
        "run",
        "--scenario",
        "disjoint-rectangles",
        "--start",
        "-2.5,3",
        "--iters",
        "50",
        "--no-regularity",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&out)["runs"].as_array().unwrap().len(), 1);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let unknown = feasilab(&["run", "--scenario", "no-such-scenario", "--out", out_dir]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("no-such-scenario"));

    let bad_schedule = feasilab(&[
        "run",
        "--scenario",
        "trapezoids",
        "--schedule",
        "sideways",
        "--out",
        out_dir,
    ]);
    assert_eq!(bad_schedule.status.code(), Some(2));

    assert_eq!(
        feasilab(&["verify", "--filter", "nonsense"]).status.code(),
        Some(2)
    );
}

#[test]
fn gap_between_two_discs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    fs::write(&a, r#"{"type":"ball","center":[0,0],"radius":1}"#).unwrap();
    fs::write(&b, r#"{"type":"ball","center":[0.5,0],"radius":1}"#).unwrap();
    let out = feasilab(&[
        "gap",
        "--setA",
        a.to_str().unwrap(),
        "--setB",
        b.to_str().unwrap(),
        "--N",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Translating a disc by t moves it exactly |t| in Hausdorff distance.
    let h = json(&out)["hausdorff"].as_f64().unwrap();
    assert!((h - 0.5).abs() < 1e-6, "h = {h}");
}

#[test]
fn verify_runs_a_single_suite() {
    let out = feasilab(&["verify", "--filter", "modulus"]);
    assert!(out.status.success());
    let summary = json(&out);
    assert_eq!(summary["passed"], true);
    let suites = summary["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["name"], "modulus");
}
