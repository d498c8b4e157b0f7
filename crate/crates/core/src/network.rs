//! Two-route bottleneck with BPR volume-delay functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static congestion description of a single route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteParams {
    /// Travel time on an empty road, in minutes.
    pub free_flow_time: f64,
    /// Vehicles per interval at which travel time doubles.
    pub capacity: f64,
    pub exponent: f64,
}

impl RouteParams {
    pub fn new(free_flow_time: f64, capacity: f64, exponent: f64) -> Result<Self> {
        let params = RouteParams {
            free_flow_time,
            capacity,
            exponent,
        };
        params.validate("route")?;
        Ok(params)
    }

    pub(crate) fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.free_flow_time.is_finite() && self.free_flow_time > 0.0) {
            return Err(Error::field(
                format!("{prefix}.free_flow_time"),
                format!("must be > 0, got {}", self.free_flow_time),
            ));
        }
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return Err(Error::field(
                format!("{prefix}.capacity"),
                format!("must be > 0, got {}", self.capacity),
            ));
        }
        if !(self.exponent.is_finite() && self.exponent > 1.0) {
            return Err(Error::field(
                format!("{prefix}.exponent"),
                format!("must be > 1, got {}", self.exponent),
            ));
        }
        Ok(())
    }

    /// BPR travel time `t0 * (1 + (flow / Q)^b)`.
    pub fn travel_time(&self, flow: f64) -> Result<f64> {
        if flow.is_nan() || flow < 0.0 {
            return Err(Error::NegativeFlow(flow));
        }
        Ok(self.travel_time_unchecked(flow))
    }

    #[inline]
    pub(crate) fn travel_time_unchecked(&self, flow: f64) -> f64 {
        self.free_flow_time * (1.0 + (flow / self.capacity).powf(self.exponent))
    }
}

/// Route label. `A` is the short, narrow route in the default network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Route {
    A,
    B,
}

impl Route {
    pub fn other(self) -> Route {
        match self {
            Route::A => Route::B,
            Route::B => Route::A,
        }
    }
}

/// Two independent, non-overlapping routes between one origin and destination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRouteNetwork {
    pub route_a: RouteParams,
    pub route_b: RouteParams,
}

impl Default for TwoRouteNetwork {
    fn default() -> Self {
        TwoRouteNetwork {
            route_a: RouteParams {
                free_flow_time: 5.0,
                capacity: 500.0,
                exponent: 2.0,
            },
            route_b: RouteParams {
                free_flow_time: 15.0,
                capacity: 800.0,
                exponent: 2.0,
            },
        }
    }
}

impl TwoRouteNetwork {
    pub fn validate(&self) -> Result<()> {
        self.route_a.validate("network.route_a")?;
        self.route_b.validate("network.route_b")
    }

    pub fn route(&self, route: Route) -> &RouteParams {
        match route {
            Route::A => &self.route_a,
            Route::B => &self.route_b,
        }
    }

    /// Travel times `(t_A, t_B)` for the given route flows.
    pub fn travel_times(&self, q_a: f64, q_b: f64) -> Result<(f64, f64)> {
        Ok((self.route_a.travel_time(q_a)?, self.route_b.travel_time(q_b)?))
    }

    /// Total vehicle-minutes `q_A t_A(q_A) + q_B t_B(q_B)` for an integer split.
    #[inline]
    pub(crate) fn total_time(&self, q_a: usize, q_b: usize) -> f64 {
        let (q_a, q_b) = (q_a as f64, q_b as f64);
        q_a * self.route_a.travel_time_unchecked(q_a) + q_b * self.route_b.travel_time_unchecked(q_b)
    }
}

/// Free function form of [`RouteParams::travel_time`].
pub fn bpr_travel_time(params: &RouteParams, flow: f64) -> Result<f64> {
    params.travel_time(flow)
}
