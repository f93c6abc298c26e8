use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freqctl::{scenario_file, toy_grid};

fn freqctl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqctl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn toy_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/toy_grid.json")
}

#[test]
fn simulate_toy_grid_converges() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_file();
    let out = freqctl(
        &["simulate", toy.to_str().unwrap(), "--scheme", "CONSENSUS"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let cost = summary["steady_cost_paper"].as_f64().unwrap();
    assert!((cost - 23.278).abs() <= 0.05, "{cost}");
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,omega_1,"));
    assert!(csv.lines().last().unwrap().starts_with("200,"));
}

#[test]
fn short_horizon_reports_no_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_file();
    let out = freqctl(
        &["simulate", toy.to_str().unwrap(), "--horizon", "0.001"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = freqctl(&["simulate", "no_such_scenario.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_scenario.json"));
}

#[test]
fn malformed_file_names_the_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        "{\n  \"nodes\": [],\n  \"horizon\": \"long\"\n}\n",
    )
    .unwrap();
    let out = freqctl(&["simulate", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn invalid_scenario_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_file();
    let out = freqctl(
        &["simulate", toy.to_str().unwrap(), "--dt", "-1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt must be positive"));
    let out = freqctl(
        &["simulate", toy.to_str().unwrap(), "--no-such-flag"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exported_scenario_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = freqctl(
        &[
            "toy",
            "--scheme",
            "HYBRID_SINGLE",
            "--T",
            "0.25",
            "-o",
            "toy.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let parsed = scenario_file::from_path(&dir.path().join("toy.json")).unwrap();
    let expected = toy_grid()
        .with_scheme(freqctl::Scheme::HybridSingle)
        .with_message_interval(freqctl::MessageInterval::Every(0.25));
    assert_eq!(parsed, expected);
    assert_eq!(
        scenario_file::from_json(&scenario_file::to_json(&parsed)).unwrap(),
        parsed
    );
}

#[test]
fn optimal_prints_dispatch() {
    let dir = tempfile::tempdir().unwrap();
    let toy = toy_file();
    let out = freqctl(&["optimal", toy.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((r["cost_paper"].as_f64().unwrap() - 23.278).abs() < 0.01);
}

#[test]
fn stability_report_for_single_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("hybrid.json"),
        scenario_file::to_json(
            &toy_grid()
                .with_scheme(freqctl::Scheme::HybridSingle)
                .with_failure(1, 6, 0.0),
        ),
    )
    .unwrap();
    let out = freqctl(
        &["stability", "hybrid.json", "-o", "report.json"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(r["spectral_abscissa_excl_zeros"].as_f64().unwrap() < 0.0);
}

#[test]
fn repro_emits_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = freqctl(&["repro", "failure_costs"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("reference (reconstructed topology)"));
    let bad = freqctl(&["repro", "fig9"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}
