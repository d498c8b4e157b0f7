//! Human driver model.
//!
//! Each driver carries a fixed pair of Gumbel tastes, one per route, and an
//! exponentially filtered estimate of each route's travel time. Only the route
//! actually driven is updated. The daily choice maximizes `-T_r + eps_r`,
//! except with probability `explore_rate` the driver picks a route uniformly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Route, TwoRouteNetwork};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Fixed per-driver taste terms, in minutes-equivalent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TasteProfile {
    pub eps_a: f64,
    pub eps_b: f64,
}

impl TasteProfile {
    pub fn get(&self, route: Route) -> f64 {
        match route {
            Route::A => self.eps_a,
            Route::B => self.eps_b,
        }
    }
}

/// Predicted travel times, in minutes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateVector {
    pub t_a_hat: f64,
    pub t_b_hat: f64,
}

impl EstimateVector {
    /// Estimates equal to the free-flow times of the network.
    pub fn free_flow(network: &TwoRouteNetwork) -> Self {
        EstimateVector {
            t_a_hat: network.route_a.free_flow_time,
            t_b_hat: network.route_b.free_flow_time,
        }
    }

    pub fn get(&self, route: Route) -> f64 {
        match route {
            Route::A => self.t_a_hat,
            Route::B => self.t_b_hat,
        }
    }

    fn get_mut(&mut self, route: Route) -> &mut f64 {
        match route {
            Route::A => &mut self.t_a_hat,
            Route::B => &mut self.t_b_hat,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanAgent {
    pub id: usize,
    pub tastes: TasteProfile,
    pub estimates: EstimateVector,
    /// `None` only before the first simulated day.
    pub last_route: Option<Route>,
}

impl HumanAgent {
    pub fn new(id: usize, tastes: TasteProfile, estimates: EstimateVector) -> Self {
        HumanAgent {
            id,
            tastes,
            estimates,
            last_route: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanParams {
    /// Weight of the latest experience in the estimate update.
    pub learning_rate: f64,
    /// Probability of a uniformly random route on a given day.
    pub explore_rate: f64,
    /// Gumbel scale of the taste terms.
    pub taste_spread: f64,
}

impl Default for HumanParams {
    fn default() -> Self {
        HumanParams {
            learning_rate: 0.2,
            explore_rate: 0.1,
            taste_spread: 5.0,
        }
    }
}

impl HumanParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::field(
                "alpha",
                format!("must lie in [0, 1], got {}", self.learning_rate),
            ));
        }
        if !(0.0..=1.0).contains(&self.explore_rate) {
            return Err(Error::field(
                "epsilon",
                format!("must lie in [0, 1], got {}", self.explore_rate),
            ));
        }
        if !(self.taste_spread.is_finite() && self.taste_spread > 0.0) {
            return Err(Error::field(
                "beta",
                format!("must be > 0, got {}", self.taste_spread),
            ));
        }
        Ok(())
    }
}

/// Inverse-CDF sample of a max-Gumbel variable with scale `taste_spread` and
/// location `-taste_spread * EULER_GAMMA`, so that the result has mean zero.
pub fn sample_taste(random_draw: f64, taste_spread: f64) -> Result<f64> {
    if !(random_draw > 0.0 && random_draw < 1.0) {
        return Err(Error::DrawOutOfRange(random_draw));
    }
    if taste_spread.is_nan() || taste_spread <= 0.0 {
        return Err(Error::field("beta", format!("must be > 0, got {taste_spread}")));
    }
    let location = -taste_spread * EULER_GAMMA;
    Ok(location - taste_spread * (-random_draw.ln()).ln())
}

/// `U_r = -T_r + eps_r`; larger is better.
pub fn perceived_utility(agent: &HumanAgent, route: Route) -> f64 {
    -agent.estimates.get(route) + agent.tastes.get(route)
}

/// Daily route choice. Both draws are uniform on `[0, 1)`; the exploration
/// coin is compared against `explore_rate`, and the route coin only matters
/// when exploring. Exact utility ties go to `A`.
pub fn choose_route(agent: &HumanAgent, explore_draw: f64, route_draw: f64, params: &HumanParams) -> Route {
    if explore_draw < params.explore_rate {
        return uniform_route(route_draw);
    }
    if perceived_utility(agent, Route::A) >= perceived_utility(agent, Route::B) {
        Route::A
    } else {
        Route::B
    }
}

#[inline]
pub(crate) fn uniform_route(route_draw: f64) -> Route {
    if route_draw < 0.5 {
        Route::A
    } else {
        Route::B
    }
}

/// Exponential filter on the route taken; the other estimate is untouched.
pub fn update_estimate(
    estimates: EstimateVector,
    route_taken: Route,
    experienced_time: f64,
    learning_rate: f64,
) -> Result<EstimateVector> {
    if experienced_time.is_nan() || experienced_time <= 0.0 {
        return Err(Error::NonPositiveTime(experienced_time));
    }
    let mut next = estimates;
    let slot = next.get_mut(route_taken);
    *slot = (1.0 - learning_rate) * *slot + learning_rate * experienced_time;
    Ok(next)
}

/// Logit probability of choosing `A`, `exp(-T_A/b) / (exp(-T_A/b) + exp(-T_B/b))`.
pub fn logit_probability(t_a_hat: f64, t_b_hat: f64, taste_spread: f64) -> f64 {
    let va = -t_a_hat / taste_spread;
    let vb = -t_b_hat / taste_spread;
    let top = va.max(vb);
    let ea = (va - top).exp();
    let eb = (vb - top).exp();
    ea / (ea + eb)
}
