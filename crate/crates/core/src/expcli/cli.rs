//! `bottlesim` command line. Exit codes: 0 success, 1 invalid input, 2 runtime failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::metrics::{paired_t_test, TTestOutcome};
use crate::par::Execution;

use super::config::{load_config, ExperimentSpec};
use super::output::{read_summary, SummaryRow};
use super::runner::{run_experiment, RunOptions};

/// Overrides the config seed list with one seed.
pub const SEED_ENV: &str = "BOTTLESIM_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bottlesim", version, about = "Two-route day-to-day simulation of human drivers and a CAV fleet")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every point of a config and write daily and summary CSVs.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent runs; defaults to all cores, 1 runs sequentially.
        #[arg(long)]
        jobs: Option<usize>,
        /// Skip the per-run daily files.
        #[arg(long)]
        no_daily: bool,
    },
    /// Like `run`, but writes only summary.csv unless `--daily` is given.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        daily: bool,
    },
    /// Paired t-test between two summary columns, one test per config point.
    Ttest {
        summary: PathBuf,
        /// Label for the compared statistic; defaults to `colA-colB`.
        #[arg(long)]
        metric: Option<String>,
        /// Two summary columns, e.g. `tau_b,tau`.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pair: Vec<String>,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn seed_override() -> std::result::Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Invalid(format!("invalid `{SEED_ENV}`: expected an unsigned integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn load(path: &Path) -> std::result::Result<ExperimentSpec, Failure> {
    // an unreadable config is a usage error, not a runtime failure
    let spec = load_config(path).map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(match seed_override()? {
        Some(seed) => spec.with_seed(seed),
        None => spec,
    })
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    write_daily: bool,
    stdout: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let spec = load(&config)?;
    let out_dir = out
        .or_else(|| spec.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let options = RunOptions {
        out_dir,
        execution: Execution::from_jobs(jobs),
        write_daily,
    };
    let report = run_experiment(&spec, &options)?;
    let _ = writeln!(
        stdout,
        "{} runs -> {} ({} daily files)",
        report.rows.len(),
        report.summary_path.display(),
        report.daily_paths.len()
    );
    Ok(())
}

fn ttest(
    summary: PathBuf,
    metric: Option<String>,
    pair: Vec<String>,
    stdout: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let [left, right] = <[String; 2]>::try_from(pair)
        .map_err(|_| Failure::Invalid("`--pair` takes exactly two columns, e.g. tau_b,tau".into()))?;
    let rows = read_summary(&summary).map_err(|e| match e {
        Error::Io { .. } => Failure::Invalid(e.to_string()),
        e => Failure::from(e),
    })?;
    let label = metric.unwrap_or_else(|| format!("{left}-{right}"));

    type Point = (usize, u64, u64, u64);
    let mut groups: BTreeMap<Point, Vec<&SummaryRow>> = BTreeMap::new();
    for row in &rows {
        // bit order equals numeric order for nonnegative floats
        let key = (
            row.strategy as usize,
            row.cav_share.to_bits(),
            row.beta.to_bits(),
            row.congestion.to_bits(),
        );
        groups.entry(key).or_default().push(row);
    }
    if groups.is_empty() {
        return Err(Failure::Invalid(format!("{}: no rows", summary.display())));
    }
    for group in groups.values() {
        let mut a = Vec::with_capacity(group.len());
        let mut b = Vec::with_capacity(group.len());
        for row in group {
            let value = |col: &str| -> std::result::Result<f64, Failure> {
                row.column(col)?
                    .ok_or_else(|| Failure::Invalid(format!("`{col}` is NA for seed {}", row.seed)))
            };
            a.push(value(&left)?);
            b.push(value(&right)?);
        }
        let head = &group[0];
        let point = format!(
            "strategy={} cav_share={} beta={} congestion={} n={}",
            head.strategy,
            head.cav_share,
            head.beta,
            head.congestion,
            group.len()
        );
        let line = match paired_t_test(&a, &b)? {
            TTestOutcome::Test(r) => format!(
                "{point} metric={label} t={:.6} df={} significant_p<0.001={}",
                r.t_statistic, r.degrees_of_freedom, r.significant_at_0_001
            ),
            TTestOutcome::Degenerate {
                degrees_of_freedom,
                mean_difference,
            } => format!(
                "{point} metric={label} degenerate (zero variance of differences, mean difference {mean_difference}) df={degrees_of_freedom}"
            ),
        };
        let _ = writeln!(stdout, "{line}");
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            no_daily,
        } => run(config, out, jobs, !no_daily, stdout),
        Command::Sweep {
            config,
            out,
            jobs,
            daily,
        } => run(config, out, jobs, daily, stdout),
        Command::Ttest { summary, metric, pair } => ttest(summary, metric, pair, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}
