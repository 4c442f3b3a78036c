mod common;

use std::io::Write;

use common::{check_deterministic, check_invocation, run_cli, INVOCATIONS};
use serde_json::Value;

fn golden_group(prefix: &str) {
    let mut failures = Vec::new();
    for inv in INVOCATIONS.iter().filter(|i| i.args[0] == prefix) {
        if let Err(e) = check_invocation(inv) {
            failures.push(e);
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn bounds_golden() {
    golden_group("bounds");
}

#[test]
fn witness_golden() {
    golden_group("witness");
}

#[test]
fn standardize_golden() {
    golden_group("standardize");
}

#[test]
fn verify_golden() {
    golden_group("verify");
}

#[test]
fn seeded_runs_are_byte_identical() {
    check_deterministic(&[
        "verify",
        "--suite",
        "beta",
        "--seed",
        "11",
        "--cases",
        "3",
        "--samples",
        "20000",
    ])
    .unwrap();
    check_deterministic(&[
        "verify",
        "--suite",
        "lp",
        "--resolution",
        "9",
        "--cases",
        "10",
        "--seed",
        "4",
    ])
    .unwrap();
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "verify",
        "--suite",
        "three-point",
        "--cases",
        "200",
        "--seed",
        "5",
    ];
    let run = |threads: &str| {
        std::process::Command::new(env!("CARGO_BIN_EXE_covbounds"))
            .args(args)
            .env("COVBOUNDS_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

fn csv_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

fn standardize_csv(body: &str, extra: &[&str]) -> common::Output {
    let f = csv_file(body);
    let path = f.path().display().to_string();
    let mut args = vec!["standardize", "--data", path.as_str()];
    args.extend(common::unit_args());
    args.extend(extra);
    run_cli(&args)
}

#[test]
fn rows_outside_the_box_are_reported() {
    let out = standardize_csv("x,y\n0,0\n1.5,0.2\n1,1\n0.5,-0.1\n", &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["rows"], 2);
    let lines: Vec<u64> = v["rejected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["line"].as_u64().unwrap())
        .collect();
    assert_eq!(lines, vec![3, 5]);
    assert_eq!(v["d"], 1.0);
}

#[test]
fn malformed_data_exits_two() {
    for (body, code) in [
        ("x,y\n0,0\nfoo,1\n", "MALFORMED_CSV"),
        ("a,b\n0,0\n", "MALFORMED_CSV"),
        ("x,y\n0,0,0\n", "MALFORMED_CSV"),
        ("x,y\n", "EMPTY_DATASET"),
        ("x,y\n5,5\n", "EMPTY_DATASET"),
    ] {
        let out = standardize_csv(body, &[]);
        assert_eq!(out.code, 2, "{body:?}");
        let err: Value = serde_json::from_str(&out.stderr).unwrap();
        assert_eq!(err["error"]["code"], code, "{body:?}");
    }
    let out = run_cli(&[
        "standardize",
        "--a",
        "0",
        "--b",
        "1",
        "--c",
        "0",
        "--d",
        "1",
        "--data",
        "/nonexistent/file.csv",
    ]);
    assert_eq!(out.code, 2);
}

#[test]
fn moments_and_data_are_exclusive() {
    let out = standardize_csv("x,y\n0,0\n", &["--mean-x", "0.5"]);
    assert_eq!(out.code, 2);
}

/// Replicates witness atoms as CSV rows in proportion to their weights.
fn witness_to_csv(witness: &Value, rows: f64) -> String {
    let mut body = String::from("x,y\n");
    for atom in witness["atoms"].as_array().unwrap() {
        let count = (atom["p"].as_f64().unwrap() * rows).round() as usize;
        for _ in 0..count {
            body += &format!("{},{}\n", atom["x"], atom["y"]);
        }
    }
    body
}

#[test]
fn witness_round_trips_through_standardize() {
    let cases: [(&[&str], &str, f64); 4] = [
        (
            &["--mean-x", "0.3", "--mean-y", "0.6", "--side", "lower"],
            "d_prime",
            -1.0,
        ),
        (
            &["--mean-x", "0.3", "--mean-y", "0.6", "--side", "upper"],
            "d_prime",
            1.0,
        ),
        (
            &[
                "--mean-x", "0.5", "--mean-y", "0.5", "--var-x", "0.01", "--var-y", "0.01",
                "--side", "upper",
            ],
            "d_second",
            1.0,
        ),
        (
            &[
                "--mean-x", "0.5", "--mean-y", "0.5", "--var-x", "0.01", "--var-y", "0.01",
                "--side", "lower",
            ],
            "d_second",
            -1.0,
        ),
    ];
    for (flags, measure, expected) in cases {
        let mut args = vec!["witness"];
        args.extend(common::unit_args());
        args.extend(flags);
        let out = run_cli(&args);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let w: Value = serde_json::from_str(&out.stdout).unwrap();
        let out = standardize_csv(&witness_to_csv(&w, 1000.0), &[]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let m: Value = serde_json::from_str(&out.stdout).unwrap();
        let got = m[measure].as_f64().unwrap();
        assert!(
            (got - expected).abs() <= 1e-9,
            "{flags:?}: {measure} = {got}"
        );
    }
}

#[test]
fn verify_failure_exit_code_is_distinct_from_usage() {
    let out = run_cli(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.code, 2);
    let out = run_cli(&[
        "verify",
        "--suite",
        "lp",
        "--cases",
        "3",
        "--resolution",
        "5",
    ]);
    assert_eq!(out.code, 0);
}

#[test]
fn help_goes_to_stdout() {
    let out = run_cli(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("witness"));
}
