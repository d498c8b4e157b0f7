use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use crate::engine::{run_scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{paired_t_test, ratio_report, window_averages, TTestOutcome};
use crate::par::{map_ordered, Execution};

use super::config::ExperimentSpec;
use super::output::{daily_csv, daily_file_name, summary_csv, write_atomic, SummaryRow};

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub execution: Execution,
    /// Write one `daily/*.csv` per run next to `summary.csv`.
    pub write_daily: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out_dir: PathBuf::from("out"),
            execution: Execution::Parallel,
            write_daily: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    /// Sorted by (strategy, share, beta, congestion, seed).
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
    pub daily_paths: Vec<PathBuf>,
}

/// Runs one scenario and reduces it to its summary row.
pub fn summarize(config: &ScenarioConfig) -> Result<SummaryRow> {
    let log = run_scenario(config)?;
    let windows = window_averages(&log);
    Ok(SummaryRow::new(config, windows, ratio_report(&windows)))
}

/// Executes every run of the spec and writes `summary.csv` (plus daily files
/// if requested) under `options.out_dir`. On failure nothing written by this
/// call is left behind.
pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<ExperimentReport> {
    let runs = spec.run_set();
    let out_dir = &options.out_dir;
    let outcomes = map_ordered(&runs, options.execution, |config| -> Result<(SummaryRow, Option<PathBuf>)> {
        let log = run_scenario(config)?;
        let windows = window_averages(&log);
        let row = SummaryRow::new(config, windows, ratio_report(&windows));
        let daily = if options.write_daily {
            let path = out_dir.join(daily_file_name(config));
            write_atomic(&path, &daily_csv(&log)?)?;
            Some(path)
        } else {
            None
        };
        Ok((row, daily))
    });

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut daily_paths = Vec::new();
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok((row, daily)) => {
                rows.push(row);
                daily_paths.extend(daily);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let summary_path = out_dir.join("summary.csv");
    let written = match first_error {
        Some(e) => Err(e),
        None => summary_csv(&rows).and_then(|bytes| write_atomic(&summary_path, &bytes)),
    };
    if let Err(e) = written {
        for path in &daily_paths {
            let _ = fs::remove_file(path);
        }
        return Err(e);
    }
    rows.sort_by(|a, b| a.cmp_key(b));
    Ok(ExperimentReport {
        rows,
        summary_path,
        daily_paths,
    })
}

/// A windowed statistic or ratio from the summary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    TauB,
    Tau,
    UB,
    U,
    Rho,
    FracAHdv,
    FracACav,
    OptGap,
    EquityGap,
    CavAdvantage,
    EffectChangeToCav,
    EffectRemainingHdv,
    PerceivedEffectRemainingHdv,
}

impl Metric {
    pub const ALL: [Metric; 13] = [
        Metric::TauB,
        Metric::Tau,
        Metric::UB,
        Metric::U,
        Metric::Rho,
        Metric::FracAHdv,
        Metric::FracACav,
        Metric::OptGap,
        Metric::EquityGap,
        Metric::CavAdvantage,
        Metric::EffectChangeToCav,
        Metric::EffectRemainingHdv,
        Metric::PerceivedEffectRemainingHdv,
    ];

    /// Column name in summary.csv.
    pub fn name(self) -> &'static str {
        match self {
            Metric::TauB => "tau_b",
            Metric::Tau => "tau",
            Metric::UB => "u_b",
            Metric::U => "u",
            Metric::Rho => "rho",
            Metric::FracAHdv => "frac_a_hdv",
            Metric::FracACav => "frac_a_cav",
            Metric::OptGap => "opt_gap",
            Metric::EquityGap => "equity_gap",
            Metric::CavAdvantage => "cav_advantage",
            Metric::EffectChangeToCav => "effect_change_to_cav",
            Metric::EffectRemainingHdv => "effect_remaining_hdv",
            Metric::PerceivedEffectRemainingHdv => "perceived_effect_remaining_hdv",
        }
    }

    pub fn of(self, row: &SummaryRow) -> Option<f64> {
        row.column(self.name()).ok().flatten()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::field("metric", format!("unknown metric '{s}'")))
    }
}

/// Two (config point, metric) sides evaluated on the same seeds.
#[derive(Clone, Debug)]
pub struct PairedComparison {
    pub left: (ScenarioConfig, Metric),
    pub right: (ScenarioConfig, Metric),
}

impl PairedComparison {
    /// Two metrics of the same runs, e.g. `tau_b` against `tau`.
    pub fn within(config: ScenarioConfig, left: Metric, right: Metric) -> Self {
        PairedComparison {
            left: (config.clone(), left),
            right: (config, right),
        }
    }

    /// One metric at two config points.
    pub fn between(left: ScenarioConfig, right: ScenarioConfig, metric: Metric) -> Self {
        PairedComparison {
            left: (left, metric),
            right: (right, metric),
        }
    }
}

/// Runs both sides once per seed and applies the paired t-test.
pub fn replicate_and_test(comparison: &PairedComparison, seeds: &[u64], execution: Execution) -> Result<TTestOutcome> {
    let same_point = comparison.left.0 == comparison.right.0;
    let pairs = map_ordered(seeds, execution, |&seed| -> Result<(f64, f64)> {
        let side = |config: &ScenarioConfig| summarize(&ScenarioConfig { seed, ..config.clone() });
        let left_row = side(&comparison.left.0)?;
        let right_row = if same_point {
            left_row.clone()
        } else {
            side(&comparison.right.0)?
        };
        let pick = |row: &SummaryRow, metric: Metric| {
            metric
                .of(row)
                .ok_or_else(|| Error::field(metric.name(), format!("undefined for seed {seed}")))
        };
        Ok((pick(&left_row, comparison.left.1)?, pick(&right_row, comparison.right.1)?))
    });
    let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    paired_t_test(&a, &b)
}
