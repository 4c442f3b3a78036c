//! Command-line front end. Every subcommand writes JSON to stdout; failures
//! write `{"error": {"code", "message"}}` to stderr.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad usage or an
//! infeasible/invalid request.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{comparison_bounds, sharp_bounds};
use crate::domain::{BoxDomain, MomentSpec};
use crate::error::Error;
use crate::extremal::{witness, Side};
use crate::joint::DiscreteJoint;
use crate::oracle::report::CheckRecord;
use crate::oracle::sweep::{beta_suite, lp_suite, three_point_suite, DEFAULT_BETA_SAMPLES};
use crate::standardize::{measures, StandardizedMeasures};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "covbounds",
    version,
    about = "Sharp covariance bounds for box-bounded random variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sharp covariance interval and the classical bounds it improves on.
    Bounds(SpecArgs),
    /// A joint distribution attaining the lower or upper bound.
    Witness {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum)]
        side: SideArg,
    },
    /// Standardized covariance measures from moments or a CSV sample.
    Standardize {
        #[command(flatten)]
        spec: SpecArgs,
        /// Covariance to standardize (requires moment flags as applicable).
        #[arg(
            long,
            allow_negative_numbers = true,
            required_unless_present = "data",
            conflicts_with = "data"
        )]
        cov: Option<f64>,
        /// CSV file with header `x,y`; moments are the population statistics.
        #[arg(long, conflicts_with_all = ["mean_x", "mean_y", "var_x", "var_y"])]
        data: Option<PathBuf>,
    },
    /// Check the closed forms against the LP oracle and family sweeps.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Grid points per axis for the LP suite.
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cases per suite (defaults: lp 100, three-point 1000, beta 10).
        #[arg(long)]
        cases: Option<usize>,
        /// Draws per beta configuration.
        #[arg(long, default_value_t = DEFAULT_BETA_SAMPLES)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    #[arg(long, allow_negative_numbers = true)]
    d: f64,
    #[arg(long, allow_negative_numbers = true)]
    mean_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mean_y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    var_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    var_y: Option<f64>,
}

impl SpecArgs {
    fn domain(&self) -> Result<BoxDomain, CliError> {
        Ok(BoxDomain::new(self.a, self.b, self.c, self.d)?)
    }

    fn spec(&self) -> MomentSpec {
        MomentSpec {
            mean_x: self.mean_x,
            mean_y: self.mean_y,
            var_x: self.var_x,
            var_y: self.var_y,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lp,
    ThreePoint,
    Beta,
    All,
}

/// A failure carried to stderr as a JSON error object.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn to_json(&self) -> String {
        json!({"error": {"code": self.code, "message": self.message}}).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `args` (program name first) and runs the command without
/// touching the process streams.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    stdout: e.to_string(),
                    stderr: String::new(),
                    code: EXIT_OK,
                },
                _ => {
                    let message = e.to_string();
                    let first = message.lines().next().unwrap_or_default();
                    let first = first.trim_start_matches("error: ").to_string();
                    failure(CliError::new("USAGE", first))
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok((stdout, code)) => Outcome {
            stdout,
            stderr: String::new(),
            code,
        },
        Err(e) => failure(e),
    }
}

fn failure(e: CliError) -> Outcome {
    Outcome {
        stdout: String::new(),
        stderr: e.to_json() + "\n",
        code: EXIT_USAGE,
    }
}

/// Runs the CLI against the real process streams and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use std::io::Write;
    let out = run(args);
    // A closed pipe is not worth a panic.
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    out.code
}

fn pretty(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn dispatch(command: Command) -> Result<(String, i32), CliError> {
    match command {
        Command::Bounds(args) => cmd_bounds(&args).map(|v| (pretty(&v), EXIT_OK)),
        Command::Witness { spec, side } => cmd_witness(&spec, side).map(|v| (pretty(&v), EXIT_OK)),
        Command::Standardize { spec, cov, data } => {
            cmd_standardize(&spec, cov, data.as_deref()).map(|v| (pretty(&v), EXIT_OK))
        }
        Command::Verify {
            suite,
            resolution,
            seed,
            cases,
            samples,
        } => cmd_verify(suite, resolution, seed, cases, samples),
    }
}

fn cmd_bounds(args: &SpecArgs) -> Result<Value, CliError> {
    let bx = args.domain()?;
    let spec = args.spec();
    let iv = sharp_bounds(&bx, &spec)?;
    let comparison = match spec.mean_x.zip(spec.mean_y) {
        Some(_) => serde_json::to_value(comparison_bounds(&bx, &spec)?).expect("serializable"),
        None => Value::Null,
    };
    Ok(json!({
        "regime": iv.regime.name(),
        "lower": iv.lower,
        "upper": iv.upper,
        "active_lower": iv.lower_active,
        "active_upper": iv.upper_active,
        "comparison": comparison,
    }))
}

fn cmd_witness(args: &SpecArgs, side: SideArg) -> Result<Value, CliError> {
    let bx = args.domain()?;
    let spec = args.spec();
    let iv = sharp_bounds(&bx, &spec)?;
    let (side, bound) = match side {
        SideArg::Lower => (Side::Lower, iv.lower),
        SideArg::Upper => (Side::Upper, iv.upper),
    };
    let w = witness(&bx, &spec, side)?;
    let m = w.joint.moments();
    Ok(json!({
        "regime": iv.regime.name(),
        "side": side,
        "atoms": w.joint.atoms(),
        "moments": {
            "mean_x": m.mean_x,
            "mean_y": m.mean_y,
            "var_x": m.var_x,
            "var_y": m.var_y,
        },
        "cov": m.cov,
        "bound": bound,
        "oracle_witness": w.oracle_witness,
    }))
}

fn measures_json(m: &StandardizedMeasures) -> serde_json::Map<String, Value> {
    let named = [
        ("d", m.d),
        ("r", m.r),
        ("d_prime", m.d_prime),
        ("d_second", m.d_second),
    ];
    let mut out = serde_json::Map::new();
    for (name, measure) in named {
        out.insert(name.into(), json!(measure.value));
    }
    let flags: serde_json::Map<_, _> = named
        .iter()
        .map(|(name, measure)| (name.to_string(), json!(measure.is_defined())))
        .collect();
    let reasons: serde_json::Map<_, _> = named
        .iter()
        .map(|(name, measure)| (name.to_string(), json!(measure.reason)))
        .collect();
    out.insert("defined_flags".into(), Value::Object(flags));
    out.insert("reasons".into(), Value::Object(reasons));
    out
}

fn cmd_standardize(
    args: &SpecArgs,
    cov: Option<f64>,
    data: Option<&Path>,
) -> Result<Value, CliError> {
    let bx = args.domain()?;
    match (cov, data) {
        (Some(cov), None) => {
            let m = measures(&bx, &args.spec(), cov)?;
            Ok(Value::Object(measures_json(&m)))
        }
        (None, Some(path)) => {
            let dataset = SampleDataset::load(path, &bx)?;
            let joint = DiscreteJoint::empirical(&dataset.rows)?;
            let mom = joint.moments();
            let m = measures(&bx, &mom.spec(), mom.cov)?;
            let mut out = measures_json(&m);
            out.insert("moments".into(), json!(mom));
            out.insert("rows".into(), json!(dataset.rows.len()));
            out.insert("rejected".into(), json!(dataset.rejected));
            Ok(Value::Object(out))
        }
        _ => Err(CliError::new(
            "USAGE",
            "exactly one of --cov and --data is required",
        )),
    }
}

/// A data row dropped because it lies outside the declared box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    pub line: u64,
    pub x: f64,
    pub y: f64,
    pub reason: &'static str,
}

/// Rows of an `x,y` CSV file that lie in the declared box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDataset {
    pub rows: Vec<(f64, f64)>,
    pub source: PathBuf,
    pub rejected: Vec<RejectedRow>,
}

impl SampleDataset {
    /// Unparsable content is an error; rows outside `bx` are dropped and
    /// listed in `rejected`. The box is never inferred from the data.
    pub fn load(path: &Path, bx: &BoxDomain) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::new("IO_ERROR", format!("{}: {e}", path.display())))?;
        let malformed = |msg: String| CliError::new("MALFORMED_CSV", msg);
        let headers = reader
            .headers()
            .map_err(|e| malformed(e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
            return Err(malformed(format!(
                "expected header `x,y`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        let mut rejected = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| malformed(e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| -> Result<f64, CliError> {
                record[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        malformed(format!(
                            "line {line}: `{}` is not a finite number",
                            &record[i]
                        ))
                    })
            };
            let (x, y) = (field(0)?, field(1)?);
            if bx.contains(x, y) {
                rows.push((x, y));
            } else {
                rejected.push(RejectedRow {
                    line,
                    x,
                    y,
                    reason: "OUTSIDE_BOX",
                });
            }
        }
        if rows.is_empty() {
            return Err(CliError::new(
                "EMPTY_DATASET",
                format!("{}: no rows inside the box", path.display()),
            ));
        }
        Ok(SampleDataset {
            rows,
            source: path.to_path_buf(),
            rejected,
        })
    }
}

fn cmd_verify(
    suite: Suite,
    resolution: usize,
    seed: u64,
    cases: Option<usize>,
    samples: usize,
) -> Result<(String, i32), CliError> {
    if resolution < 2 {
        return Err(CliError::new(
            "USAGE",
            format!("--resolution must be at least 2, got {resolution}"),
        ));
    }
    let mut records: Vec<CheckRecord> = Vec::new();
    if matches!(suite, Suite::Lp | Suite::All) {
        records.extend(lp_suite(cases.unwrap_or(100), resolution, seed));
    }
    if matches!(suite, Suite::ThreePoint | Suite::All) {
        records.extend(three_point_suite(cases.unwrap_or(1000), seed));
    }
    if matches!(suite, Suite::Beta | Suite::All) {
        records.extend(beta_suite(cases.unwrap_or(10), samples, seed));
    }
    let mut out = String::new();
    for rec in &records {
        let _ = writeln!(out, "{}", rec.to_json_line());
    }
    let code = if records.iter().all(|r| r.pass) {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    };
    Ok((out, code))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &str) -> Outcome {
        run(std::iter::once("covbounds").chain(args.split_whitespace()))
    }

    fn stdout_json(out: &Outcome) -> Value {
        serde_json::from_str(&out.stdout).unwrap()
    }

    #[test]
    fn bounds_means_only() {
        let out = run_args("bounds --a 0 --b 1 --c 0 --d 1 --mean-x 0.3 --mean-y 0.6");
        assert_eq!(out.code, 0);
        let v = stdout_json(&out);
        assert_eq!(v["lower"], -0.18);
        assert_eq!(v["upper"], 0.12);
        assert_eq!(v["regime"], "means_only");
        assert!(v["comparison"]["bd04"].is_object());
        assert!(v["comparison"]["cs"].is_null());
    }

    #[test]
    fn negative_box_values_parse() {
        let out = run_args("bounds --a -2 --b -1 --c -3.5 --d 0");
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(stdout_json(&out)["upper"], 0.875);
    }

    #[test]
    fn invalid_box_exits_two() {
        let out = run_args("bounds --a 1 --b 0 --c 0 --d 1");
        assert_eq!(out.code, 2);
        let err: Value = serde_json::from_str(&out.stderr).unwrap();
        assert_eq!(err["error"]["code"], "INVALID_BOX");
    }

    #[test]
    fn usage_errors_are_json() {
        for args in [
            "bounds --a 0",
            "frobnicate",
            "witness --a 0 --b 1 --c 0 --d 1",
        ] {
            let out = run_args(args);
            assert_eq!(out.code, 2);
            let err: Value = serde_json::from_str(&out.stderr).unwrap();
            assert_eq!(err["error"]["code"], "USAGE");
        }
    }

    #[test]
    fn standardize_requires_exactly_one_source() {
        let out = run_args("standardize --a 0 --b 1 --c 0 --d 1");
        assert_eq!(out.code, 2);
        let out = run_args("standardize --a 0 --b 1 --c 0 --d 1 --cov 0.1 --data x.csv");
        assert_eq!(out.code, 2);
    }

    #[test]
    fn standardize_out_of_range_cov() {
        let out =
            run_args("standardize --a 0 --b 1 --c 0 --d 1 --mean-x 0.3 --mean-y 0.6 --cov 0.2");
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("COV_OUT_OF_RANGE"));
    }

    #[test]
    fn verify_rejects_tiny_resolution() {
        let out = run_args("verify --suite lp --resolution 1");
        assert_eq!(out.code, 2);
    }
}
