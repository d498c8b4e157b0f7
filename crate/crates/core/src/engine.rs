//! The day-to-day loop.
//!
//! Each day human drivers commit to a route, the fleet (once it exists)
//! splits itself against the committed counts, travel times follow from the
//! combined flows, and every driver updates the estimate of the route it
//! drove. On M-day the highest-indexed drivers leave the human population and
//! become the fleet.
//!
//! All randomness comes from one ChaCha8 stream seeded with
//! `ScenarioConfig::seed` and consumed in a fixed order: two taste draws per
//! driver (A then B) in id order at initialization, then per day and per
//! driver in id order an exploration coin followed by a route coin. On day 1
//! the exploration coin is drawn and ignored.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    choose_route, sample_taste, uniform_route, update_estimate, EstimateVector, HumanAgent, HumanParams,
    TasteProfile,
};
use crate::error::{Error, Result};
use crate::fleet::{fleet_optimize, Strategy, StrategyWeights};
use crate::metrics::day_statistics;
use crate::network::{Route, TwoRouteNetwork};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub human_params: HumanParams,
    pub network: TwoRouteNetwork,
    /// Demand multiplier on `base_population`.
    pub congestion: f64,
    pub cav_share: f64,
    pub strategy: Strategy,
    /// Stabilization, baseline, post-M-day stabilization, post-M-day measurement.
    pub phase_lengths: [u32; 4],
    pub base_population: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            human_params: HumanParams::default(),
            network: TwoRouteNetwork::default(),
            congestion: 1.0,
            cav_share: 0.0,
            strategy: Strategy::Selfish,
            phase_lengths: [100; 4],
            base_population: 1000,
            seed: 0,
        }
    }
}

/// Round half up for nonnegative values.
fn round_count(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.human_params.validate()?;
        self.network.validate()?;
        if !(self.congestion.is_finite() && self.congestion > 0.0) {
            return Err(Error::field(
                "congestion",
                format!("must be > 0, got {}", self.congestion),
            ));
        }
        if !(0.0..=1.0).contains(&self.cav_share) {
            return Err(Error::field(
                "cav_share",
                format!("must lie in [0, 1], got {}", self.cav_share),
            ));
        }
        if self.base_population == 0 {
            return Err(Error::field("base_population", "must be positive"));
        }
        if self.total_population() == 0 {
            return Err(Error::field(
                "congestion",
                format!(
                    "{} x {} rounds to an empty population",
                    self.base_population, self.congestion
                ),
            ));
        }
        Ok(())
    }

    pub fn total_population(&self) -> usize {
        round_count(self.base_population as f64 * self.congestion)
    }

    /// Number of drivers converted to the fleet on M-day.
    pub fn fleet_size(&self) -> usize {
        round_count(self.total_population() as f64 * self.cav_share)
    }

    /// Drivers that remain human after M-day; ids `0..survivors`.
    pub fn survivors(&self) -> usize {
        self.total_population() - self.fleet_size()
    }

    pub fn total_days(&self) -> u32 {
        self.phase_lengths.iter().sum()
    }

    /// Last day before the fleet appears.
    pub fn mday(&self) -> u32 {
        self.phase_lengths[0] + self.phase_lengths[1]
    }

    /// Inclusive pre-M-day measurement window (days 101..=200 by default).
    pub fn baseline_window(&self) -> (u32, u32) {
        (self.phase_lengths[0] + 1, self.mday())
    }

    /// Inclusive post-M-day measurement window (days 301..=400 by default).
    pub fn post_window(&self) -> (u32, u32) {
        (self.mday() + self.phase_lengths[2] + 1, self.total_days())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    pub q_hdv_a: usize,
    pub q_hdv_b: usize,
    pub q_cav_a: usize,
    pub q_cav_b: usize,
    pub t_a: f64,
    pub t_b: f64,
    pub mean_hdv_time: Option<f64>,
    pub mean_perceived_hdv_time_survivors: Option<f64>,
    pub mean_cav_time: Option<f64>,
}

impl DayRecord {
    pub fn q_a(&self) -> usize {
        self.q_hdv_a + self.q_cav_a
    }

    pub fn q_b(&self) -> usize {
        self.q_hdv_b + self.q_cav_b
    }

    pub fn total(&self) -> usize {
        self.q_a() + self.q_b()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationLog {
    pub config: ScenarioConfig,
    pub records: Vec<DayRecord>,
}

impl SimulationLog {
    /// Record for a 1-based day number.
    pub fn day(&self, day: u32) -> Option<&DayRecord> {
        day.checked_sub(1).and_then(|i| self.records.get(i as usize))
    }
}

#[derive(Clone, Copy, Debug)]
struct Fleet {
    size: usize,
    weights: StrategyWeights,
}

#[derive(Clone, Debug)]
pub struct SimulationState {
    config: ScenarioConfig,
    /// Current human drivers, ordered by id.
    agents: Vec<HumanAgent>,
    survivors: usize,
    fleet: Option<Fleet>,
    mday_applied: bool,
    day: u32,
    rng: ChaCha8Rng,
}

impl SimulationState {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn agents(&self) -> &[HumanAgent] {
        &self.agents
    }

    /// Number of completed days.
    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn fleet_size(&self) -> usize {
        self.fleet.map_or(0, |f| f.size)
    }

    pub fn mday_applied(&self) -> bool {
        self.mday_applied
    }
}

pub fn init_simulation(config: &ScenarioConfig) -> Result<SimulationState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let beta = config.human_params.taste_spread;
    let estimates = EstimateVector::free_flow(&config.network);
    let agents = (0..config.total_population())
        .map(|id| {
            let eps_a = sample_taste(rng.sample(Open01), beta)?;
            let eps_b = sample_taste(rng.sample(Open01), beta)?;
            Ok(HumanAgent::new(id, TasteProfile { eps_a, eps_b }, estimates))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationState {
        survivors: config.survivors(),
        config: config.clone(),
        agents,
        fleet: None,
        mday_applied: false,
        day: 0,
        rng,
    })
}

pub fn step_day(state: &mut SimulationState) -> Result<DayRecord> {
    let total_days = state.config.total_days();
    if state.day >= total_days {
        return Err(Error::SimulationFinished(total_days));
    }
    let day = state.day + 1;
    let params = state.config.human_params;
    let network = state.config.network;

    let (mut q_hdv_a, mut q_hdv_b) = (0, 0);
    for agent in &mut state.agents {
        let explore_draw: f64 = state.rng.gen();
        let route_draw: f64 = state.rng.gen();
        let route = if day == 1 {
            uniform_route(route_draw)
        } else {
            choose_route(agent, explore_draw, route_draw, &params)
        };
        match route {
            Route::A => q_hdv_a += 1,
            Route::B => q_hdv_b += 1,
        }
        agent.last_route = Some(route);
    }

    let (q_cav_a, q_cav_b) = match state.fleet {
        Some(fleet) => {
            let decision = fleet_optimize(&fleet.weights, q_hdv_a, q_hdv_b, fleet.size, &network);
            (decision.cav_on_a, decision.cav_on_b)
        }
        None => (0, 0),
    };

    let (t_a, t_b) = network.travel_times((q_hdv_a + q_cav_a) as f64, (q_hdv_b + q_cav_b) as f64)?;

    for agent in &mut state.agents {
        let route = agent.last_route.expect("route committed above");
        let experienced = if route == Route::A { t_a } else { t_b };
        agent.estimates = update_estimate(agent.estimates, route, experienced, params.learning_rate)?;
    }

    let stats = day_statistics(&state.agents, state.survivors, (q_cav_a, q_cav_b), (t_a, t_b));
    state.day = day;
    Ok(DayRecord {
        day,
        q_hdv_a,
        q_hdv_b,
        q_cav_a,
        q_cav_b,
        t_a,
        t_b,
        mean_hdv_time: stats.mean_hdv_time,
        mean_perceived_hdv_time_survivors: stats.mean_perceived_hdv_time,
        mean_cav_time: stats.mean_cav_time,
    })
}

/// Converts the highest-indexed drivers into the fleet. Surviving drivers
/// keep their tastes, estimates and last routes.
pub fn apply_mday(state: &mut SimulationState) -> Result<()> {
    if state.mday_applied {
        return Err(Error::MdayAlreadyApplied);
    }
    state.mday_applied = true;
    let size = state.config.fleet_size();
    state.agents.truncate(state.survivors);
    if size > 0 {
        state.fleet = Some(Fleet {
            size,
            weights: state.config.strategy.weights(),
        });
    }
    Ok(())
}

/// Runs all four phases, converting drivers to the fleet right after the
/// baseline phase.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimulationLog> {
    let mut state = init_simulation(config)?;
    let mday = config.mday();
    let mut records = Vec::with_capacity(config.total_days() as usize);
    while state.day < config.total_days() {
        if state.day == mday && !state.mday_applied {
            apply_mday(&mut state)?;
        }
        records.push(step_day(&mut state)?);
    }
    Ok(SimulationLog {
        config: config.clone(),
        records,
    })
}
