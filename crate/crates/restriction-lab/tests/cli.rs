//! Drives the installed binary end to end: report shapes, exit codes,
//! config merging, file outputs, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_restriction-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL: &[&str] = &[
    "--n-polar",
    "8",
    "--n-azimuthal",
    "16",
    "--n-radial",
    "8",
    "--n-circle",
    "16",
    "--band-limit",
    "4",
];

#[test]
fn eval_reports_constant_values_and_echoes_config() {
    let out = run(&[&["eval"], SMALL].concat());
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let q = doc["report"]["q_value"].as_f64().unwrap();
    let lambda = doc["report"]["lambda_value"].as_f64().unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    assert!((q - tau.sqrt()).abs() < 1e-10);
    assert!((lambda - 16.0 * std::f64::consts::PI.powi(4)).abs() < 1e-8);
    assert_eq!(doc["config"]["resolution"]["n_polar"], 8);
    assert_eq!(doc["config"]["resolution"]["L"], 4);
    assert_eq!(doc["config"]["field"], "constant");
}

#[test]
fn solve_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("a");
    let d2 = dir.path().join("b");
    for d in [&d1, &d2] {
        let out = run(&[
            &["solve", "--init", "perturbed:0.05", "--seed", "4"],
            SMALL,
            &["--out-dir", d.to_str().unwrap()],
        ]
        .concat());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let strip = |p: &Path| {
        let mut v: Value =
            serde_json::from_str(&std::fs::read_to_string(p.join("solve_report.json")).unwrap())
                .unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&d1), strip(&d2));
    for name in ["solve_history.csv", "solve_spectrum.csv"] {
        assert_eq!(
            std::fs::read(d1.join(name)).unwrap(),
            std::fs::read(d2.join(name)).unwrap()
        );
    }
}

#[test]
fn unconverged_solve_exits_three_but_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        &["solve", "--init", "perturbed:0.3", "--max-iters", "2"],
        SMALL,
        &["--out-dir", dir.path().to_str().unwrap()],
    ]
    .concat());
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("solve_report.json").exists());
    assert!(dir.path().join("solve_history.csv").exists());
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve_report.json")).unwrap())
            .unwrap();
    assert_eq!(doc["power"]["converged"], false);
}

#[test]
fn invalid_inputs_exit_two_without_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["eval", "--field", "harmonic:9,0", "--band-limit", "4"],
        vec!["eval", "--n-polar", "600"],
        vec!["eval", "--field", "no/such/file.csv"],
        vec!["solve", "--init", "perturbed:fast"],
        vec!["phase", "--field", "modulated-constant:1,2"],
        vec!["--threads", "0", "eval"],
    ];
    for case in cases {
        let mut args = case.clone();
        args.extend(["--out", report.to_str().unwrap()]);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {case:?}");
        assert!(!report.exists(), "args {case:?} wrote a file");
    }
}

#[test]
fn dumped_spectrum_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("field.csv");
    let first = run(&[
        &["eval", "--field", "harmonic:2,0"],
        SMALL,
        &["--dump-spectrum", csv.to_str().unwrap()],
    ]
    .concat());
    assert!(first.status.success());
    let second = run(&[&["eval", "--field", csv.to_str().unwrap()], SMALL].concat());
    assert!(second.status.success());
    let a = stdout_json(&first)["report"]["q_value"].as_f64().unwrap();
    let b = stdout_json(&second)["report"]["q_value"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-12 * a.abs());
}

#[test]
fn config_file_applies_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.toml");
    std::fs::write(
        &cfg,
        "seed = 11\n[resolution]\nn_polar = 8\nn_azimuthal = 16\nn_radial = 8\nn_circle = 16\nL = 4\n",
    )
    .unwrap();
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--n-polar",
        "10",
        "--n-azimuthal",
        "20",
        "eval",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["config"]["resolution"]["n_polar"], 10);
    assert_eq!(doc["config"]["resolution"]["n_radial"], 8);
    assert_eq!(doc["config"]["seed"], 11);

    std::fs::write(&cfg, "not_a_key = 1\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "eval"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn phase_recovers_a_planted_modulation() {
    let out = run(&[
        "--n-polar",
        "12",
        "--n-azimuthal",
        "24",
        "--band-limit",
        "10",
        "phase",
        "--field",
        "modulated-constant:0,2,0",
        "--xi-max",
        "8",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    let xi = doc["fit"]["xi"].as_array().unwrap();
    assert!((xi[1].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(doc["fit"]["residual_rel"].as_f64().unwrap() < 1e-8);
}
