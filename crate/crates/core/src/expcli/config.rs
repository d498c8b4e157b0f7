use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::engine::ScenarioConfig;
use crate::error::{Error, Result};
use crate::fleet::Strategy;
use crate::network::TwoRouteNetwork;

pub const SCHEMA_VERSION: u64 = 1;

/// A validated experiment: a base scenario plus sweep axes and seeds. The run
/// set is the cartesian product of all axes and seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub base: ScenarioConfig,
    pub strategies: Vec<Strategy>,
    pub cav_shares: Vec<f64>,
    pub betas: Vec<f64>,
    pub congestions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let base = ScenarioConfig::default();
        ExperimentSpec {
            strategies: vec![base.strategy],
            cav_shares: vec![base.cav_share],
            betas: vec![base.human_params.taste_spread],
            congestions: vec![base.congestion],
            seeds: vec![base.seed],
            out_dir: None,
            base,
        }
    }
}

impl ExperimentSpec {
    /// Every run, ordered by (strategy, share, beta, congestion, seed).
    pub fn run_set(&self) -> Vec<ScenarioConfig> {
        let mut strategies = self.strategies.clone();
        strategies.sort();
        strategies.dedup();
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();

        let mut runs = Vec::new();
        for &strategy in &strategies {
            for &cav_share in &sorted(&self.cav_shares) {
                for &beta in &sorted(&self.betas) {
                    for &congestion in &sorted(&self.congestions) {
                        for &seed in &seeds {
                            let mut config = self.base.clone();
                            config.strategy = strategy;
                            config.cav_share = cav_share;
                            config.human_params.taste_spread = beta;
                            config.congestion = congestion;
                            config.seed = seed;
                            runs.push(config);
                        }
                    }
                }
            }
        }
        runs
    }

    /// Replaces the seed list with a single seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds = vec![seed];
        self
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&value)
}

const KNOWN_FIELDS: [&str; 14] = [
    "schema_version",
    "alpha",
    "epsilon",
    "beta",
    "congestion",
    "cav_share",
    "strategy",
    "phase_lengths",
    "base_population",
    "network",
    "seed",
    "seeds",
    "out",
    "comment",
];

fn as_f64(field: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::field(field, format!("expected a number, got {v}")))
}

fn as_u64(field: &str, v: &Value) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::field(field, format!("expected a nonnegative integer, got {v}")))
}

/// A scalar or a nonempty list of scalars.
fn axis<T>(obj: &Map<String, Value>, field: &str, parse: impl Fn(&str, &Value) -> Result<T>) -> Result<Option<Vec<T>>> {
    match obj.get(field) {
        None => Ok(None),
        Some(Value::Array(items)) => {
            if items.is_empty() {
                return Err(Error::field(field, "list must not be empty"));
            }
            items
                .iter()
                .enumerate()
                .map(|(i, v)| parse(&format!("{field}[{i}]"), v))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        }
        Some(v) => parse(field, v).map(|x| Some(vec![x])),
    }
}

fn check(field: &str, ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::field(field, message()))
    }
}

/// Validates a parsed JSON document and applies defaults for omitted fields.
pub fn parse_config(value: &Value) -> Result<ExperimentSpec> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::field("<root>", "config must be a JSON object"))?;
    if let Some(unknown) = obj.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
        return Err(Error::field(unknown.clone(), "unknown field"));
    }
    let mut spec = ExperimentSpec::default();

    if let Some(v) = obj.get("schema_version") {
        let version = as_u64("schema_version", v)?;
        check("schema_version", version == SCHEMA_VERSION, || {
            format!("unsupported version {version}, expected {SCHEMA_VERSION}")
        })?;
    }

    let params = &mut spec.base.human_params;
    if let Some(v) = obj.get("alpha") {
        params.learning_rate = as_f64("alpha", v)?;
    }
    if let Some(v) = obj.get("epsilon") {
        params.explore_rate = as_f64("epsilon", v)?;
    }
    params.validate()?;

    if let Some(v) = obj.get("network") {
        let network: TwoRouteNetwork =
            serde_json::from_value(v.clone()).map_err(|e| Error::field("network", e.to_string()))?;
        network.validate()?;
        spec.base.network = network;
    }

    if let Some(v) = obj.get("phase_lengths") {
        let items = v
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::field("phase_lengths", "expected a list of four day counts"))?;
        for (i, item) in items.iter().enumerate() {
            let field = format!("phase_lengths[{i}]");
            let days = as_u64(&field, item)?;
            spec.base.phase_lengths[i] =
                u32::try_from(days).map_err(|_| Error::field(field, "too many days"))?;
        }
    }

    if let Some(v) = obj.get("base_population") {
        let n = as_u64("base_population", v)?;
        check("base_population", n > 0, || "must be positive".into())?;
        spec.base.base_population = n as usize;
    }

    if let Some(betas) = axis(obj, "beta", |f, v| {
        let x = as_f64(f, v)?;
        check(f, x.is_finite() && x > 0.0, || format!("must be > 0, got {x}"))?;
        Ok(x)
    })? {
        spec.betas = betas;
    }
    if let Some(shares) = axis(obj, "cav_share", |f, v| {
        let x = as_f64(f, v)?;
        check(f, (0.0..=1.0).contains(&x), || format!("must lie in [0, 1], got {x}"))?;
        Ok(x)
    })? {
        spec.cav_shares = shares;
    }
    if let Some(levels) = axis(obj, "congestion", |f, v| {
        let x = as_f64(f, v)?;
        check(f, x.is_finite() && x > 0.0, || format!("must be > 0, got {x}"))?;
        Ok(x)
    })? {
        spec.congestions = levels;
    }
    if let Some(strategies) = axis(obj, "strategy", |f, v| {
        v.as_str()
            .ok_or_else(|| Error::field(f, format!("expected a strategy name, got {v}")))?
            .parse::<Strategy>()
            .map_err(|e| Error::field(f, e.to_string()))
    })? {
        spec.strategies = strategies;
    }

    match (obj.get("seed"), obj.get("seeds")) {
        (Some(_), Some(_)) => return Err(Error::field("seeds", "give either `seed` or `seeds`, not both")),
        (Some(v), None) => spec.seeds = vec![as_u64("seed", v)?],
        (None, Some(_)) => spec.seeds = axis(obj, "seeds", as_u64)?.expect("present"),
        (None, None) => {}
    }

    if let Some(v) = obj.get("out") {
        let out = v
            .as_str()
            .ok_or_else(|| Error::field("out", format!("expected a path string, got {v}")))?;
        spec.out_dir = Some(PathBuf::from(out));
    }

    spec.base.strategy = spec.strategies[0];
    spec.base.cav_share = spec.cav_shares[0];
    spec.base.human_params.taste_spread = spec.betas[0];
    spec.base.congestion = spec.congestions[0];
    spec.base.seed = spec.seeds[0];
    for config in spec.run_set() {
        config.validate()?;
    }
    Ok(spec)
}
