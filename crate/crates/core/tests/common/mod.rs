//! CLI golden files shared by the integration tests and the acceptance run.
//!
//! Set `COVBOUNDS_UPDATE_GOLDEN=1` to rewrite the files from the current
//! binary instead of comparing.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};

pub struct Invocation {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit_code: i32,
    /// Verification output is compared as a per-check summary, not bytes.
    pub summarize: bool,
}

const UNIT: [&str; 8] = ["--a", "0", "--b", "1", "--c", "0", "--d", "1"];

pub const INVOCATIONS: &[Invocation] = &[
    Invocation {
        name: "bounds_means",
        args: &[
            "bounds", "--a", "0", "--b", "1", "--c", "0", "--d", "1", "--mean-x", "0.3",
            "--mean-y", "0.6",
        ],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "bounds_box_only",
        args: &["bounds", "--a", "0", "--b", "1", "--c", "0", "--d", "1"],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "bounds_invalid_box",
        args: &["bounds", "--a", "1", "--b", "0", "--c", "0", "--d", "1"],
        exit_code: 2,
        summarize: false,
    },
    Invocation {
        name: "witness_symmetric_upper",
        args: &[
            "witness", "--a", "0", "--b", "1", "--c", "0", "--d", "1", "--mean-x", "0.5",
            "--mean-y", "0.5", "--side", "upper",
        ],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "witness_means_lower",
        args: &[
            "witness", "--a", "0", "--b", "1", "--c", "0", "--d", "1", "--mean-x", "0.3",
            "--mean-y", "0.6", "--side", "lower",
        ],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "witness_full_noise",
        args: &[
            "witness", "--a", "0", "--b", "1", "--c", "0", "--d", "1", "--mean-x", "0.1",
            "--mean-y", "0.5", "--var-x", "0.09", "--var-y", "0.25", "--side", "upper",
        ],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "standardize_means",
        args: &[
            "standardize",
            "--cov",
            "0.06",
            "--mean-x",
            "0.3",
            "--mean-y",
            "0.6",
            "--a",
            "0",
            "--b",
            "1",
            "--c",
            "0",
            "--d",
            "1",
        ],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "standardize_corners_csv",
        args: &[
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
            "@data/corners.csv",
        ],
        exit_code: 0,
        summarize: false,
    },
    Invocation {
        name: "standardize_cov_too_large",
        args: &[
            "standardize",
            "--cov",
            "0.2",
            "--mean-x",
            "0.3",
            "--mean-y",
            "0.6",
            "--a",
            "0",
            "--b",
            "1",
            "--c",
            "0",
            "--d",
            "1",
        ],
        exit_code: 2,
        summarize: false,
    },
    Invocation {
        name: "verify_lp_corners",
        args: &[
            "verify",
            "--suite",
            "lp",
            "--resolution",
            "2",
            "--cases",
            "100",
        ],
        exit_code: 0,
        summarize: true,
    },
    Invocation {
        name: "verify_three_point",
        args: &[
            "verify",
            "--suite",
            "three-point",
            "--cases",
            "1000",
            "--seed",
            "7",
        ],
        exit_code: 0,
        summarize: true,
    },
    Invocation {
        name: "verify_beta",
        args: &["verify", "--suite", "beta", "--seed", "7"],
        exit_code: 0,
        summarize: true,
    },
];

pub fn tests_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Runs the built binary. Arguments starting with `@` are paths relative to
/// the tests directory.
pub fn run_cli(args: &[&str]) -> Output {
    let resolved: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(rel) => tests_dir().join(rel).display().to_string(),
            None => a.to_string(),
        })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_covbounds"))
        .args(&resolved)
        .output()
        .expect("spawn covbounds");
    Output {
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
        code: out.status.code().unwrap_or(-1),
    }
}

/// Record count, pass count and per-check tallies of a JSON-lines report.
pub fn summarize(stdout: &str) -> Value {
    let mut checks: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut seeds = std::collections::BTreeSet::new();
    for line in stdout.lines() {
        let rec: Value = serde_json::from_str(line).expect("JSON line");
        let entry = checks
            .entry(rec["check"].as_str().unwrap().to_string())
            .or_default();
        entry.0 += 1;
        entry.1 += rec["pass"].as_bool().unwrap() as u64;
        if let Some(seed) = rec["params"].get("seed") {
            seeds.insert(seed.to_string());
        }
    }
    let total: u64 = checks.values().map(|c| c.0).sum();
    let passed: u64 = checks.values().map(|c| c.1).sum();
    json!({
        "records": total,
        "passed": passed,
        "checks": checks
            .iter()
            .map(|(k, (n, p))| (k.clone(), json!({"records": n, "passed": p})))
            .collect::<serde_json::Map<_, _>>(),
        "seeds": seeds.into_iter().collect::<Vec<_>>(),
    })
}

fn compare_or_update(path: PathBuf, actual: &str, problems: &mut Vec<String>) {
    if std::env::var_os("COVBOUNDS_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).expect("write golden");
        return;
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) if expected == actual => {}
        Ok(expected) => problems.push(format!(
            "{}: output differs\n--- expected\n{expected}\n--- actual\n{actual}",
            path.display()
        )),
        Err(e) => problems.push(format!("{}: {e}", path.display())),
    }
}

/// Checks one invocation against its golden files and exit code.
pub fn check_invocation(inv: &Invocation) -> Result<(), String> {
    let out = run_cli(inv.args);
    let mut problems = Vec::new();
    if out.code != inv.exit_code {
        problems.push(format!(
            "{}: exit code {} (expected {})\nstderr: {}",
            inv.name, out.code, inv.exit_code, out.stderr
        ));
    }
    let golden = tests_dir().join("golden");
    if inv.summarize {
        let summary = serde_json::to_string_pretty(&summarize(&out.stdout)).unwrap() + "\n";
        compare_or_update(
            golden.join(format!("{}.summary.json", inv.name)),
            &summary,
            &mut problems,
        );
    } else {
        compare_or_update(
            golden.join(format!("{}.stdout", inv.name)),
            &out.stdout,
            &mut problems,
        );
    }
    compare_or_update(
        golden.join(format!("{}.stderr", inv.name)),
        &out.stderr,
        &mut problems,
    );
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.join("\n"))
    }
}

/// Runs an invocation twice and demands byte-identical output.
pub fn check_deterministic(args: &[&str]) -> Result<(), String> {
    let first = run_cli(args);
    let second = run_cli(args);
    if first.stdout == second.stdout && first.stderr == second.stderr && first.code == second.code {
        Ok(())
    } else {
        Err(format!("{args:?}: output differs between runs"))
    }
}

pub fn unit_args() -> Vec<&'static str> {
    UNIT.to_vec()
}
