//! CSV schemas. Headers are fixed; absent group statistics are written as `NA`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::engine::{ScenarioConfig, SimulationLog};
use crate::error::{Error, Result};
use crate::fleet::Strategy;
use crate::metrics::{RatioReport, WindowAverages};

pub const DAILY_HEADER: &str =
    "day,q_hdv_a,q_hdv_b,q_cav_a,q_cav_b,t_a,t_b,mean_hdv_time,mean_perceived_hdv_time,mean_cav_time";

pub const SUMMARY_HEADER: &str = "strategy,cav_share,beta,congestion,seed,tau_b,tau,u_b,u,rho,frac_a_hdv,\
frac_a_cav,opt_gap,equity_gap,cav_advantage,effect_change_to_cav,effect_remaining_hdv,\
perceived_effect_remaining_hdv";

pub const NA: &str = "NA";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_owned(), |x| x.to_string())
}

fn parse_opt(field: &str, s: &str) -> Result<Option<f64>> {
    if s == NA {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::field(field, format!("not a number: '{s}'")))
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

/// Per-day series of one run.
pub fn daily_csv(log: &SimulationLog) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(DAILY_HEADER.split(','))?;
        for r in &log.records {
            w.write_record([
                r.day.to_string(),
                r.q_hdv_a.to_string(),
                r.q_hdv_b.to_string(),
                r.q_cav_a.to_string(),
                r.q_cav_b.to_string(),
                r.t_a.to_string(),
                r.t_b.to_string(),
                fmt_opt(r.mean_hdv_time),
                fmt_opt(r.mean_perceived_hdv_time_survivors),
                fmt_opt(r.mean_cav_time),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
    }
    Ok(buf)
}

/// One line of summary.csv.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub cav_share: f64,
    pub beta: f64,
    pub congestion: f64,
    pub seed: u64,
    pub windows: WindowAverages,
    pub ratios: RatioReport,
}

impl SummaryRow {
    pub fn new(config: &ScenarioConfig, windows: WindowAverages, ratios: RatioReport) -> Self {
        SummaryRow {
            strategy: config.strategy,
            cav_share: config.cav_share,
            beta: config.human_params.taste_spread,
            congestion: config.congestion,
            seed: config.seed,
            windows,
            ratios,
        }
    }

    /// Numeric value of a summary column, `Ok(None)` when the value is NA.
    pub fn column(&self, name: &str) -> Result<Option<f64>> {
        let w = &self.windows;
        let r = &self.ratios;
        Ok(match name {
            "cav_share" => Some(self.cav_share),
            "beta" => Some(self.beta),
            "congestion" => Some(self.congestion),
            "seed" => Some(self.seed as f64),
            "tau_b" => w.tau_b,
            "tau" => w.tau,
            "u_b" => w.u_b,
            "u" => w.u,
            "rho" => w.rho,
            "frac_a_hdv" => w.frac_a_hdv,
            "frac_a_cav" => w.frac_a_cav,
            "opt_gap" => w.opt_gap,
            "equity_gap" => w.equity_gap,
            "cav_advantage" => r.cav_advantage,
            "effect_change_to_cav" => r.effect_change_to_cav,
            "effect_remaining_hdv" => r.effect_remaining_hdv,
            "perceived_effect_remaining_hdv" => r.perceived_effect_remaining_hdv,
            other => return Err(Error::field("metric", format!("unknown summary column '{other}'"))),
        })
    }

    fn record(&self) -> Vec<String> {
        let w = &self.windows;
        let r = &self.ratios;
        vec![
            self.strategy.to_string(),
            self.cav_share.to_string(),
            self.beta.to_string(),
            self.congestion.to_string(),
            self.seed.to_string(),
            fmt_opt(w.tau_b),
            fmt_opt(w.tau),
            fmt_opt(w.u_b),
            fmt_opt(w.u),
            fmt_opt(w.rho),
            fmt_opt(w.frac_a_hdv),
            fmt_opt(w.frac_a_cav),
            fmt_opt(w.opt_gap),
            fmt_opt(w.equity_gap),
            fmt_opt(r.cav_advantage),
            fmt_opt(r.effect_change_to_cav),
            fmt_opt(r.effect_remaining_hdv),
            fmt_opt(r.perceived_effect_remaining_hdv),
        ]
    }

    fn from_record(rec: &HashMap<&str, &str>) -> Result<Self> {
        let get = |k: &str| -> Result<&str> {
            rec.get(k)
                .copied()
                .ok_or_else(|| Error::field(k, "missing column in summary"))
        };
        let num = |k: &str| -> Result<f64> {
            parse_opt(k, get(k)?)?.ok_or_else(|| Error::field(k, "must not be NA"))
        };
        let opt = |k: &str| -> Result<Option<f64>> { parse_opt(k, get(k)?) };
        Ok(SummaryRow {
            strategy: get("strategy")?.parse()?,
            cav_share: num("cav_share")?,
            beta: num("beta")?,
            congestion: num("congestion")?,
            seed: get("seed")?
                .parse()
                .map_err(|_| Error::field("seed", "not an integer"))?,
            windows: WindowAverages {
                tau_b: opt("tau_b")?,
                tau: opt("tau")?,
                u_b: opt("u_b")?,
                u: opt("u")?,
                rho: opt("rho")?,
                frac_a_hdv: opt("frac_a_hdv")?,
                frac_a_cav: opt("frac_a_cav")?,
                opt_gap: opt("opt_gap")?,
                equity_gap: opt("equity_gap")?,
            },
            ratios: RatioReport {
                cav_advantage: opt("cav_advantage")?,
                effect_change_to_cav: opt("effect_change_to_cav")?,
                effect_remaining_hdv: opt("effect_remaining_hdv")?,
                perceived_effect_remaining_hdv: opt("perceived_effect_remaining_hdv")?,
            },
        })
    }

    /// Ordering key (strategy, share, beta, congestion, seed).
    pub fn cmp_key(&self, other: &Self) -> std::cmp::Ordering {
        self.strategy
            .cmp(&other.strategy)
            .then(self.cav_share.total_cmp(&other.cav_share))
            .then(self.beta.total_cmp(&other.beta))
            .then(self.congestion.total_cmp(&other.congestion))
            .then(self.seed.cmp(&other.seed))
    }
}

/// Summary rows sorted by the canonical key, rendered as CSV.
pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.cmp_key(b));
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(SUMMARY_HEADER.split(','))?;
        for row in sorted {
            w.write_record(row.record())?;
        }
        w.flush().map_err(csv::Error::from)?;
    }
    Ok(buf)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let map: HashMap<&str, &str> = headers.iter().zip(rec.iter()).collect();
            SummaryRow::from_record(&map)
        })
        .collect()
}

/// Writes `bytes` to `path` through a temporary sibling so readers never see
/// a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".incomplete");
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(e));
    }
    Ok(())
}

/// FNV-1a, used for stable per-config-point file names.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Relative path of a run's daily file: `daily/<point hash>_seed<seed>.csv`.
/// The hash covers every knob except the seed.
pub fn daily_file_name(config: &ScenarioConfig) -> PathBuf {
    let mut point = config.clone();
    point.seed = 0;
    let key = serde_json::to_string(&point).expect("config serializes");
    PathBuf::from("daily").join(format!("{:016x}_seed{}.csv", fnv1a(key.as_bytes()), config.seed))
}
