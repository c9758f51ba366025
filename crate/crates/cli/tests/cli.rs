use std::process::{Command, Output};

use qtransfer_cli::validate::{run_validation, Formulas};
use qtransfer_cli::{EXIT_AMBIGUOUS, EXIT_INPUT, EXIT_IO, EXIT_OK, EXIT_VALIDATION};
use serde_json::Value;

fn qtransfer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtransfer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> u8 {
    out.status.code().unwrap() as u8
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn single_shot() {
    let out = qtransfer(&["single", "--lambda0", "0.7"]);
    assert_eq!(code(&out), EXIT_OK);
    assert_eq!(stdout(&out), "lambda0,fidelity\n0.7,0.8\n");
    let out = qtransfer(&["single", "--lambda0", "1.0", "--format", "json"]);
    assert_eq!(json(&out)["fidelity"], 1.0);
}

#[test]
fn input_errors_exit_2() {
    for args in [
        &["single", "--lambda0", "1.5"][..],
        &["single"],
        &["strategy", "qubit", "--n", "3"],
        &["strategy", "ent", "--n", "3", "--lambda0", "0.2"],
        &["strategy", "est", "--n", "0"],
        &["strategy", "est", "--n", "3", "--distribution"],
        &["sweep", "--n", "9", "--grid", "1"],
        &["sweep", "--n", "9", "--methods", "teleport"],
        &["single", "--lambda0", "0.5", "--precision", "5"],
        &["crossings", "--n-max", "3", "--tol", "1e-14"],
    ] {
        let out = qtransfer(args);
        assert_eq!(code(&out), EXIT_INPUT, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn strategy_reports() {
    let est = json(&qtransfer(&["strategy", "est", "--n", "9"]));
    assert_eq!(est["method"], "estimation");
    assert!((est["fidelity"].as_f64().unwrap() - 10.0 / 11.0).abs() < 1e-11);
    let qubit = json(&qtransfer(&["strategy", "qubit", "--n", "2", "--lambda0", "0.7"]));
    assert_eq!(qubit["fidelity"], 0.8);
    let ent = json(&qtransfer(&["strategy", "ent", "--n", "3", "--lambda0", "0.8"]));
    assert!((ent["fidelity"].as_f64().unwrap() - 0.886222).abs() < 1e-6);
    assert!(ent.get("mc_estimate").is_none());
}

#[test]
fn strategy_monte_carlo_is_reproducible() {
    let args = ["strategy", "ent", "--n", "5", "--lambda0", "0.7", "--mc-samples", "20000", "--seed", "11"];
    let a = qtransfer(&args);
    let b = qtransfer(&args);
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["samples"], 20000);
    assert_eq!(r["seed"], 11);
    let z = (r["mc_estimate"].as_f64().unwrap() - r["fidelity"].as_f64().unwrap()).abs()
        / r["mc_stderr"].as_f64().unwrap();
    assert!(z < 5.0);
}

#[test]
fn qubit_distribution_table() {
    let r = json(&qtransfer(&["strategy", "qubit", "--n", "4", "--lambda0", "0.7", "--distribution"]));
    let rows = r["distribution"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let total: f64 = rows.iter().map(|row| row["p_M"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-11);
}

#[test]
fn sweep_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    let out = qtransfer(&["sweep", "--methods", "all", "--n", "9", "--grid", "50", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_OK);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,N,lambda0,fidelity"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 150);
    let of = |m: &str| rows.iter().filter(|r| r[0] == m).collect::<Vec<_>>();
    let (ent, qubit, est) = (of("ent_pur"), of("qubit_pur"), of("estimation"));
    assert_eq!(ent.len(), 50);
    assert!(est.iter().all(|r| r[3] == "0.909090909091"));
    for (e, q) in ent.iter().zip(&qubit) {
        assert_eq!(e[2], q[2]);
        assert!(q[3].parse::<f64>().unwrap() >= e[3].parse::<f64>().unwrap());
    }

    let again = dir.path().join("again.csv");
    qtransfer(&["sweep", "--methods", "all", "--n", "9", "--grid", "50", "-o", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = qtransfer(&["sweep", "--n", "3", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_IO);
}

#[test]
fn crossings_table() {
    let out = qtransfer(&["crossings", "--n-max", "31"]);
    assert_eq!(code(&out), EXIT_OK);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,lambda1,lambda2"));
    let rows: Vec<(usize, f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 31);
    assert_eq!((rows[0].1, rows[0].2), (0.5, 0.5));
    assert!((rows[30].2 - 0.625).abs() < 0.02);
    let odd: Vec<f64> = rows.iter().filter(|r| r.0 % 2 == 1).map(|r| r.1).collect();
    assert!(odd.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn crossing_ambiguity_maps_to_exit_4() {
    let err = qtransfer_cli::CliError::Ambiguous {
        n: 7,
        source: qtransfer::Error::Ambiguous { sign_changes: 3 },
    };
    assert_eq!(err.exit_code(), EXIT_AMBIGUOUS);
    assert!(err.to_string().contains("N = 7"));
}

#[test]
fn validate_passes_and_is_deterministic() {
    let args = ["validate", "--seed", "7", "--mc-samples", "100000"];
    let a = qtransfer(&args);
    assert_eq!(code(&a), EXIT_OK, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, qtransfer(&args).stdout);
    let summary = json(&a);
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["seed"], 7);
    assert!(summary["checks"].as_array().unwrap().len() >= 12);
}

#[test]
fn injected_sign_error_fails_validation() {
    let formulas = Formulas {
        purify_lambda: |l| {
            let x = l.value();
            (10.0 * x * x + 2.0 * x + 1.0) / (8.0 * x * x - 4.0 * x + 5.0)
        },
        ..Formulas::default()
    };
    let summary = run_validation(&formulas, 0, 10_000).unwrap();
    assert_eq!(summary.exit_status(), EXIT_VALIDATION);
    let failed: Vec<&str> = summary.failed().map(|c| c.name).collect();
    assert!(failed.contains(&"step_lambda"), "{failed:?}");
    assert!(failed.contains(&"purify_fixed_points"));

    let formulas = Formulas {
        single_qubit_fidelity: |m, l| qtransfer::qubitpur::single_qubit_fidelity(m, l) + 1e-4,
        ..Formulas::default()
    };
    let failed: Vec<&str> = run_validation(&formulas, 0, 10_000).unwrap().failed().map(|c| c.name).collect();
    assert_eq!(failed, vec!["quadrature"]);
}
