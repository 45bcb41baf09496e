//! End-to-end checks of the `aqdsim` binary.

use std::process::{Command, Output};

use aqdsim::harness::{run, ErrorRateReport, Experiment, SimulationConfig, CSV_HEADER};

fn aqdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqdsim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn estimate_writes_csv_and_passes() {
    let o = aqdsim(&[
        "estimate",
        "--trials",
        "20000",
        "--seed",
        "5",
        "--l",
        "1,2",
        "--snr-grid",
        "1,4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let report = ErrorRateReport::read_csv(text.as_bytes()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report
        .rows
        .iter()
        .all(|r| r.analytic_ref == "pilot-rayleigh" && r.snr_convention == "snr_hat"));
}

#[test]
fn json_output_carries_config_and_rows() {
    let dir = std::env::temp_dir().join(format!("aqdsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spread.json");
    let o = aqdsim(&[
        "spread",
        "--trials",
        "5000",
        "--seed",
        "6",
        "--model",
        "bounded:1",
        "--k",
        "1,2",
        "--snr-grid",
        "2",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["config"]["experiment"], "spreading");
    assert_eq!(value["rows"].as_array().unwrap().len(), 2);
    let (cfg, report) = ErrorRateReport::from_json(&text).unwrap();
    assert_eq!(cfg.k_grid, vec![1, 2]);
    assert_eq!(report.rows[1].k, Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 5] = [
        &["detect", "--d", "1,3"],
        &["detect", "--mode", "single", "--l", "2", "--measurement", "hom-p"],
        &["detect", "--mode", "single", "--measurement", "het:2"],
        &["multiuser", "--rk", "2,1,1"],
        &["fig3", "--l", "1,2", "--k", "1"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.extend(["--trials", "3000", "--seed", "7", "--snr-grid", "1,4"]);
        let o = aqdsim(&full);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(stdout(&o).lines().count() > 1);
    }
}

#[test]
fn configuration_errors_exit_one() {
    let cases: [&[&str]; 7] = [
        &["estimate", "--trials", "10"],
        &["estimate", "--seed", "1", "--model", "weibull:2"],
        &["estimate", "--seed", "1", "--snr-grid", "1,-4"],
        &["estimate", "--seed", "1", "--format", "xml"],
        &["estimate", "--seed", "1", "--bogus"],
        &["spread", "--seed", "1", "--l", "1,2", "--g", "3"],
        &["detect", "--seed", "1", "--measurement", "hom-q"],
    ];
    for args in cases {
        let o = aqdsim(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn pilot_count_sets_subchannel_count() {
    let o = aqdsim(&[
        "spread", "--seed", "8", "--trials", "2000", "--l", "2", "--g", "3", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (cfg, _) = ErrorRateReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(cfg.n, Some(4));
}

#[test]
fn failed_comparison_exits_two() {
    // Find a seed whose single trial lands on an unlikely error.
    let seed = (0..10_000u64)
        .find(|&s| {
            let cfg = SimulationConfig::new(Experiment::PilotEstimation, vec![16.0], 1, s);
            !run(&cfg).unwrap().all_pass()
        })
        .expect("some seed errs");
    let seed = seed.to_string();
    let o = aqdsim(&["estimate", "--trials", "1", "--seed", &seed, "--snr-grid", "16"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("FAIL"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(aqdsim(&["--help"]).status.code(), Some(0));
    assert_eq!(aqdsim(&["fig3", "--help"]).status.code(), Some(0));
}
