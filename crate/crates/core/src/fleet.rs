//! Centrally coordinated CAV fleet.
//!
//! Every day the fleet observes how many human drivers committed to each route
//! and then splits its own vehicles to minimize a weighted sum of fleet and
//! human vehicle-minutes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::TwoRouteNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    Selfish,
    Altruistic,
    Malicious,
    Disruptive,
    Social,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Selfish,
        Strategy::Altruistic,
        Strategy::Malicious,
        Strategy::Disruptive,
        Strategy::Social,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Selfish => "Selfish",
            Strategy::Altruistic => "Altruistic",
            Strategy::Malicious => "Malicious",
            Strategy::Disruptive => "Disruptive",
            Strategy::Social => "Social",
        }
    }

    pub fn weights(self) -> StrategyWeights {
        let (lambda_cav, lambda_hdv) = match self {
            Strategy::Selfish => (1.0, 0.0),
            Strategy::Altruistic => (0.0, 1.0),
            Strategy::Malicious => (0.0, -1.0),
            Strategy::Disruptive => (1.0, -9.0),
            Strategy::Social => (1.0, 1.0),
        };
        StrategyWeights {
            lambda_cav,
            lambda_hdv,
            name: self,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|strategy| strategy.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownStrategy(s.to_owned()))
    }
}

/// Weights on fleet and human vehicle-minutes in the fleet objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategyWeights {
    pub lambda_cav: f64,
    pub lambda_hdv: f64,
    pub name: Strategy,
}

pub fn strategy_weights(name: &str) -> Result<StrategyWeights> {
    Ok(name.parse::<Strategy>()?.weights())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FleetDecision {
    pub cav_on_a: usize,
    pub cav_on_b: usize,
    /// Objective value at the chosen split, in weighted vehicle-minutes.
    pub objective_value: f64,
}

#[inline]
fn objective(
    weights: &StrategyWeights,
    q_hdv_a: usize,
    q_hdv_b: usize,
    q_cav_a: usize,
    q_cav: usize,
    network: &TwoRouteNetwork,
) -> f64 {
    let q_cav_b = q_cav - q_cav_a;
    let t_a = network.route_a.travel_time_unchecked((q_hdv_a + q_cav_a) as f64);
    let t_b = network.route_b.travel_time_unchecked((q_hdv_b + q_cav_b) as f64);
    let cav_minutes = q_cav_a as f64 * t_a + q_cav_b as f64 * t_b;
    let hdv_minutes = q_hdv_a as f64 * t_a + q_hdv_b as f64 * t_b;
    weights.lambda_cav * cav_minutes + weights.lambda_hdv * hdv_minutes
}

/// Weighted vehicle-minutes when `q_cav_a` of the `q_cav` fleet vehicles use `A`.
pub fn fleet_objective(
    weights: &StrategyWeights,
    q_hdv_a: usize,
    q_hdv_b: usize,
    q_cav_a: usize,
    q_cav: usize,
    network: &TwoRouteNetwork,
) -> Result<f64> {
    if q_cav_a > q_cav {
        return Err(Error::SplitOutOfRange {
            cav_on_a: q_cav_a,
            fleet: q_cav,
        });
    }
    Ok(objective(weights, q_hdv_a, q_hdv_b, q_cav_a, q_cav, network))
}

/// Exhaustive scan over `q_cav_a` in `0..=q_cav`; the smallest minimizer wins ties.
pub fn fleet_optimize(
    weights: &StrategyWeights,
    q_hdv_a: usize,
    q_hdv_b: usize,
    q_cav: usize,
    network: &TwoRouteNetwork,
) -> FleetDecision {
    let mut best = FleetDecision {
        cav_on_a: 0,
        cav_on_b: q_cav,
        objective_value: objective(weights, q_hdv_a, q_hdv_b, 0, q_cav, network),
    };
    for cav_on_a in 1..=q_cav {
        let value = objective(weights, q_hdv_a, q_hdv_b, cav_on_a, q_cav, network);
        if value < best.objective_value {
            best = FleetDecision {
                cav_on_a,
                cav_on_b: q_cav - cav_on_a,
                objective_value: value,
            };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert_eq, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle on the default network: collect every objective value,
    /// then take the first minimum.
    fn brute_force(w: &StrategyWeights, ha: usize, hb: usize, q: usize) -> (usize, f64) {
        let values: Vec<f64> = (0..=q)
            .map(|x| {
                let (qa, qb) = ((ha + x) as f64, (hb + q - x) as f64);
                let ta = 5.0 * (1.0 + (qa / 500.0) * (qa / 500.0));
                let tb = 15.0 * (1.0 + (qb / 800.0) * (qb / 800.0));
                let cav = x as f64 * ta + (q - x) as f64 * tb;
                let hdv = ha as f64 * ta + hb as f64 * tb;
                w.lambda_cav * cav + w.lambda_hdv * hdv
            })
            .collect();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let arg = values.iter().position(|v| *v == min).unwrap();
        (arg, min)
    }

    #[test]
    fn table_weights() {
        let pairs: Vec<_> = Strategy::ALL
            .iter()
            .map(|s| (s.weights().lambda_cav, s.weights().lambda_hdv))
            .collect();
        assert_eq!(pairs, vec![(1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, -9.0), (1.0, 1.0)]);
        assert_eq!(strategy_weights("Disruptive").unwrap().lambda_hdv, -9.0);
        assert_eq!(strategy_weights("social").unwrap().name, Strategy::Social);
        assert!(matches!(strategy_weights("Greedy"), Err(Error::UnknownStrategy(_))));
    }

    #[test]
    fn objective_examples() {
        let net = TwoRouteNetwork::default();
        let selfish = Strategy::Selfish.weights();
        assert_eq!(fleet_objective(&selfish, 300, 700, 0, 0, &net).unwrap(), 0.0);
        assert_eq!(fleet_objective(&selfish, 400, 500, 100, 100, &net).unwrap(), 1000.0);
        let social = Strategy::Social.weights();
        let phi = fleet_objective(&social, 300, 400, 120, 300, &net).unwrap();
        assert!((phi - net.total_time(420, 580)).abs() < 1e-9);
        assert!(matches!(
            fleet_objective(&selfish, 0, 0, 5, 4, &net),
            Err(Error::SplitOutOfRange { .. })
        ));
    }

    #[test]
    fn empty_fleet_single_point() {
        let net = TwoRouteNetwork::default();
        let d = fleet_optimize(&Strategy::Altruistic.weights(), 400, 600, 0, &net);
        assert_eq!((d.cav_on_a, d.cav_on_b), (0, 0));
        assert_eq!(d.objective_value, net.total_time(400, 600));
    }

    #[test]
    fn social_full_fleet_near_sixty_percent() {
        let net = TwoRouteNetwork::default();
        let d = fleet_optimize(&Strategy::Social.weights(), 0, 0, 1000, &net);
        // frozen from the brute-force oracle
        assert_eq!(d.cav_on_a, 597);
        assert_eq!(brute_force(&Strategy::Social.weights(), 0, 0, 1000).0, 597);
    }

    #[test]
    fn selfish_small_fleet_all_on_a() {
        let net = TwoRouteNetwork::default();
        // a roughly stabilized human split: about 530 on A
        let d = fleet_optimize(&Strategy::Selfish.weights(), 480, 420, 100, &net);
        assert_eq!(d.cav_on_a, 100);
    }

    #[test]
    fn global_minimality_random_instances() {
        let net = TwoRouteNetwork::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let strategy = Strategy::ALL[rng.gen_range(0..5)];
            let w = strategy.weights();
            let ha = rng.gen_range(0..1500);
            let hb = rng.gen_range(0..1500);
            let q = rng.gen_range(0..1200);
            let d = fleet_optimize(&w, ha, hb, q, &net);
            let (arg, min) = brute_force(&w, ha, hb, q);
            assert!(d.objective_value <= min + 1e-9 * min.abs().max(1.0));
            assert_eq!(d.cav_on_a, arg, "{strategy} {ha} {hb} {q}");
            assert_eq!(d.cav_on_a + d.cav_on_b, q);
        }
    }

    #[test]
    fn malicious_maximizes_what_altruistic_minimizes() {
        let net = TwoRouteNetwork::default();
        let (ha, hb, q) = (350, 450, 200);
        let hdv_term = |x: usize| fleet_objective(&Strategy::Altruistic.weights(), ha, hb, x, q, &net).unwrap();
        let malicious = fleet_optimize(&Strategy::Malicious.weights(), ha, hb, q, &net);
        let altruistic = fleet_optimize(&Strategy::Altruistic.weights(), ha, hb, q, &net);
        let max = (0..=q).map(hdv_term).fold(f64::NEG_INFINITY, f64::max);
        let min = (0..=q).map(hdv_term).fold(f64::INFINITY, f64::min);
        assert_eq!(hdv_term(malicious.cav_on_a), max);
        assert_eq!(hdv_term(altruistic.cav_on_a), min);
    }

    proptest! {
        #[test]
        fn deterministic(ha in 0usize..2000, hb in 0usize..2000, q in 0usize..800, s in 0usize..5) {
            let net = TwoRouteNetwork::default();
            let w = Strategy::ALL[s].weights();
            prop_assert_eq!(fleet_optimize(&w, ha, hb, q, &net), fleet_optimize(&w, ha, hb, q, &net));
        }
    }
}
