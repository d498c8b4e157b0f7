//! Day-to-day route choice on a two-route bottleneck shared by learning human
//! drivers and a centrally coordinated autonomous fleet.

pub mod agents;
pub mod engine;
pub mod error;
pub mod expcli;
pub mod fleet;
pub mod metrics;
pub mod network;
pub mod par;

pub use agents::{HumanAgent, HumanParams};
pub use engine::{run_scenario, DayRecord, ScenarioConfig, SimulationLog};
pub use error::{Error, Result};
pub use fleet::{Strategy, StrategyWeights};
pub use network::{Route, RouteParams, TwoRouteNetwork};
