//! Daily statistics, window averages, system optimum, gaps, ratios and the
//! paired t-test used for replication.

use std::collections::HashMap;

use serde::Serialize;

use crate::agents::HumanAgent;
use crate::engine::{DayRecord, SimulationLog};
use crate::error::{Error, Result};
use crate::network::{Route, TwoRouteNetwork};

/// Per-day group means; `None` for empty groups.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DayStatistics {
    pub mean_hdv_time: Option<f64>,
    /// Mean of `t_r + eps_r` over drivers that stay human after M-day.
    pub mean_perceived_hdv_time: Option<f64>,
    pub mean_cav_time: Option<f64>,
}

fn mean(sum: f64, n: usize) -> Option<f64> {
    (n > 0).then(|| sum / n as f64)
}

/// `hdvs` are the current human drivers ordered by id with today's route set;
/// the first `survivors` of them form the survivor set.
pub fn day_statistics(
    hdvs: &[HumanAgent],
    survivors: usize,
    fleet_split: (usize, usize),
    times: (f64, f64),
) -> DayStatistics {
    let (t_a, t_b) = times;
    let time_of = |route: Route| if route == Route::A { t_a } else { t_b };
    let mut hdv_sum = 0.0;
    let mut perceived_sum = 0.0;
    let mut counted = 0;
    for (i, agent) in hdvs.iter().enumerate() {
        let Some(route) = agent.last_route else { continue };
        let t = time_of(route);
        hdv_sum += t;
        counted += 1;
        if i < survivors {
            perceived_sum += t + agent.tastes.get(route);
        }
    }
    let (cav_a, cav_b) = fleet_split;
    DayStatistics {
        mean_hdv_time: mean(hdv_sum, counted),
        mean_perceived_hdv_time: mean(perceived_sum, survivors.min(counted)),
        mean_cav_time: mean(cav_a as f64 * t_a + cav_b as f64 * t_b, cav_a + cav_b),
    }
}

/// Mean travel time `S` of all vehicles for an integer split.
pub fn mean_travel_time(network: &TwoRouteNetwork, q_a: usize, q_b: usize) -> f64 {
    network.total_time(q_a, q_b) / (q_a + q_b) as f64
}

/// Exhaustive scan for the split minimizing the mean travel time of
/// `q_total` vehicles. Returns `(q_A*, S_O)`; ties go to the smaller `q_A`.
pub fn system_optimum(network: &TwoRouteNetwork, q_total: usize) -> Result<(usize, f64)> {
    if q_total == 0 {
        return Err(Error::EmptyPopulation);
    }
    let mut best = (0, mean_travel_time(network, 0, q_total));
    for q_a in 1..=q_total {
        let s = mean_travel_time(network, q_a, q_total - q_a);
        if s < best.1 {
            best = (q_a, s);
        }
    }
    Ok(best)
}

/// Flow-weighted standard deviation of the two realized route times.
pub fn equity_gap(q_a: usize, q_b: usize, t_a: f64, t_b: f64) -> f64 {
    let (qa, qb) = (q_a as f64, q_b as f64);
    let s = (qa * t_a + qb * t_b) / (qa + qb);
    ((qa * (t_a - s).powi(2) + qb * (t_b - s).powi(2)) / (qa + qb)).sqrt()
}

/// Per-day series that can be averaged over a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DayField {
    MeanHdvTime,
    MeanPerceivedHdvTime,
    MeanCavTime,
    FracAHdv,
    FracACav,
    /// Total vehicles on A.
    FlowA,
    OptGap,
    EquityGap,
}

fn fraction(on_a: usize, on_b: usize) -> Option<f64> {
    mean(on_a as f64, on_a + on_b)
}

struct OptimumCache<'a> {
    network: &'a TwoRouteNetwork,
    by_total: HashMap<usize, f64>,
}

impl OptimumCache<'_> {
    fn get(&mut self, q_total: usize) -> Option<f64> {
        if let Some(v) = self.by_total.get(&q_total) {
            return Some(*v);
        }
        let (_, s_o) = system_optimum(self.network, q_total).ok()?;
        self.by_total.insert(q_total, s_o);
        Some(s_o)
    }
}

fn field_value(field: DayField, r: &DayRecord, cache: &mut OptimumCache<'_>) -> Option<f64> {
    match field {
        DayField::MeanHdvTime => r.mean_hdv_time,
        DayField::MeanPerceivedHdvTime => r.mean_perceived_hdv_time_survivors,
        DayField::MeanCavTime => r.mean_cav_time,
        DayField::FracAHdv => fraction(r.q_hdv_a, r.q_hdv_b),
        DayField::FracACav => fraction(r.q_cav_a, r.q_cav_b),
        DayField::FlowA => Some(r.q_a() as f64),
        DayField::OptGap => {
            let s_o = cache.get(r.total())?;
            let s = (r.q_a() as f64 * r.t_a + r.q_b() as f64 * r.t_b) / r.total() as f64;
            Some(s - s_o)
        }
        DayField::EquityGap => (r.total() > 0).then(|| equity_gap(r.q_a(), r.q_b(), r.t_a, r.t_b)),
    }
}

fn window_values(log: &SimulationLog, range: (u32, u32), field: DayField) -> Result<Option<Vec<f64>>> {
    let (first, last) = range;
    if first == 0 || first > last || last as usize > log.records.len() {
        return Err(Error::EmptyWindow { first, last });
    }
    let mut cache = OptimumCache {
        network: &log.config.network,
        by_total: HashMap::new(),
    };
    Ok(log.records[first as usize - 1..last as usize]
        .iter()
        .map(|r| field_value(field, r, &mut cache))
        .collect())
}

/// Arithmetic mean of a daily series over the inclusive `range` of days.
/// `Ok(None)` if any day in the window lacks the value.
pub fn window_average(log: &SimulationLog, range: (u32, u32), field: DayField) -> Result<Option<f64>> {
    Ok(window_values(log, range, field)?.map(|v| v.iter().sum::<f64>() / v.len() as f64))
}

/// Sample variance (n - 1 denominator) of a daily series over a window.
pub fn window_variance(log: &SimulationLog, range: (u32, u32), field: DayField) -> Result<Option<f64>> {
    Ok(window_values(log, range, field)?.and_then(|v| sample_variance(&v)))
}

fn sample_variance(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let m = values.iter().sum::<f64>() / n as f64;
    Some(values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64)
}

/// Window-averaged optimality gap `S - S_O` and equity gap `sigma`.
pub fn optimality_and_equity(log: &SimulationLog, range: (u32, u32)) -> Result<(Option<f64>, Option<f64>)> {
    Ok((
        window_average(log, range, DayField::OptGap)?,
        window_average(log, range, DayField::EquityGap)?,
    ))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct WindowAverages {
    pub tau_b: Option<f64>,
    pub tau: Option<f64>,
    pub u_b: Option<f64>,
    pub u: Option<f64>,
    pub rho: Option<f64>,
    pub frac_a_hdv: Option<f64>,
    pub frac_a_cav: Option<f64>,
    pub opt_gap: Option<f64>,
    pub equity_gap: Option<f64>,
}

/// Baseline and post-M-day summaries over the log's configured windows.
/// Empty windows yield absent values.
pub fn window_averages(log: &SimulationLog) -> WindowAverages {
    let before = log.config.baseline_window();
    let after = log.config.post_window();
    let avg = |range, field| window_average(log, range, field).ok().flatten();
    WindowAverages {
        tau_b: avg(before, DayField::MeanHdvTime),
        tau: avg(after, DayField::MeanHdvTime),
        u_b: avg(before, DayField::MeanPerceivedHdvTime),
        u: avg(after, DayField::MeanPerceivedHdvTime),
        rho: avg(after, DayField::MeanCavTime),
        frac_a_hdv: avg(after, DayField::FracAHdv),
        frac_a_cav: avg(after, DayField::FracACav),
        opt_gap: avg(after, DayField::OptGap),
        equity_gap: avg(after, DayField::EquityGap),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RatioReport {
    /// tau / rho: above 1 means CAVs travel faster than the remaining HDVs.
    pub cav_advantage: Option<f64>,
    /// tau_b / rho
    pub effect_change_to_cav: Option<f64>,
    /// tau_b / tau
    pub effect_remaining_hdv: Option<f64>,
    /// u_b / u
    pub perceived_effect_remaining_hdv: Option<f64>,
}

fn ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    Some(num? / den?)
}

pub fn ratio_report(w: &WindowAverages) -> RatioReport {
    RatioReport {
        cav_advantage: ratio(w.tau, w.rho),
        effect_change_to_cav: ratio(w.tau_b, w.rho),
        effect_remaining_hdv: ratio(w.tau_b, w.tau),
        perceived_effect_remaining_hdv: ratio(w.u_b, w.u),
    }
}

/// Two-tailed critical values of Student's t for p < 0.001, by degrees of freedom.
const T_CRITICAL_0_001: [(u32, f64); 38] = [
    (1, 636.619),
    (2, 31.599),
    (3, 12.924),
    (4, 8.610),
    (5, 6.869),
    (6, 5.959),
    (7, 5.408),
    (8, 5.041),
    (9, 4.781),
    (10, 4.587),
    (11, 4.437),
    (12, 4.318),
    (13, 4.221),
    (14, 4.140),
    (15, 4.073),
    (16, 4.015),
    (17, 3.965),
    (18, 3.922),
    (19, 3.883),
    (20, 3.850),
    (21, 3.819),
    (22, 3.792),
    (23, 3.768),
    (24, 3.745),
    (25, 3.725),
    (26, 3.707),
    (27, 3.690),
    (28, 3.674),
    (29, 3.659),
    (30, 3.646),
    (40, 3.551),
    (60, 3.460),
    (80, 3.416),
    (100, 3.390),
    (120, 3.373),
    (200, 3.340),
    (500, 3.310),
    (1000, 3.300),
];

/// Critical value for `df`; between table rows the smaller df is used.
pub fn critical_value_0_001(df: u32) -> f64 {
    T_CRITICAL_0_001
        .iter()
        .rev()
        .find(|(d, _)| *d <= df)
        .map_or(f64::INFINITY, |(_, t)| *t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: u32,
    pub significant_at_0_001: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TTestOutcome {
    Test(TTestResult),
    /// The paired differences have zero variance.
    Degenerate { degrees_of_freedom: u32, mean_difference: f64 },
}

impl TTestOutcome {
    pub fn result(&self) -> Option<&TTestResult> {
        match self {
            TTestOutcome::Test(r) => Some(r),
            TTestOutcome::Degenerate { .. } => None,
        }
    }
}

pub fn paired_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<TTestOutcome> {
    let n = sample_a.len();
    if n != sample_b.len() || n < 2 {
        return Err(Error::SampleShape {
            left: n,
            right: sample_b.len(),
        });
    }
    let diffs: Vec<f64> = sample_a.iter().zip(sample_b).map(|(a, b)| a - b).collect();
    let mean_difference = diffs.iter().sum::<f64>() / n as f64;
    let sd = sample_variance(&diffs).unwrap_or(0.0).sqrt();
    let degrees_of_freedom = (n - 1) as u32;
    let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if sd <= 1e-12 * scale || sd == 0.0 {
        return Ok(TTestOutcome::Degenerate {
            degrees_of_freedom,
            mean_difference,
        });
    }
    let t_statistic = mean_difference / (sd / (n as f64).sqrt());
    Ok(TTestOutcome::Test(TTestResult {
        t_statistic,
        degrees_of_freedom,
        significant_at_0_001: t_statistic.abs() > critical_value_0_001(degrees_of_freedom),
    }))
}
