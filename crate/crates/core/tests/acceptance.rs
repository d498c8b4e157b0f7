//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads 1` to see them.

use std::time::{Duration, Instant};

use bottlesim::agents::{logit_probability, sample_taste, update_estimate, EstimateVector};
use bottlesim::engine::{run_scenario, ScenarioConfig, SimulationLog};
use bottlesim::expcli::{parse_config, replicate_and_test, run_experiment, Metric, PairedComparison, RunOptions};
use bottlesim::fleet::{fleet_optimize, Strategy};
use bottlesim::metrics::{
    equity_gap, paired_t_test, ratio_report, system_optimum, window_averages, window_variance, DayField,
    RatioReport, TTestOutcome, WindowAverages,
};
use bottlesim::network::{Route, RouteParams, TwoRouteNetwork};
use bottlesim::par::Execution;
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const PINNED_SEEDS: [u64; 3] = [1, 2, 3];

fn report(id: &str, pass: bool, detail: String) {
    println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} failed: {detail}");
}

fn scenario(strategy: Strategy, share: f64, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        strategy,
        cav_share: share,
        seed,
        ..Default::default()
    }
}

fn summarize(config: &ScenarioConfig) -> (SimulationLog, WindowAverages, RatioReport) {
    let log = run_scenario(config).unwrap();
    let w = window_averages(&log);
    let r = ratio_report(&w);
    (log, w, r)
}

#[test]
fn ac01_baseline_stabilizes() {
    let config = scenario(Strategy::Selfish, 0.0, PINNED_SEEDS[0]);
    let start = Instant::now();
    let log = run_scenario(&config).unwrap();
    let elapsed = start.elapsed();
    let sd = window_variance(&log, (101, 200), DayField::FlowA).unwrap().unwrap().sqrt();
    report(
        "AC-01 baseline stabilization",
        sd < 0.05 * 1000.0 && elapsed < Duration::from_secs(1),
        format!("sd(q_A, days 101-200) = {sd:.3} < 50, runtime {elapsed:?} < 1s"),
    );
}

#[test]
fn ac02_selfish_small_share() {
    let mut details = Vec::new();
    let mut pass = true;
    for seed in PINNED_SEEDS {
        let (_, w, r) = summarize(&scenario(Strategy::Selfish, 0.1, seed));
        let frac = w.frac_a_cav.unwrap();
        let adv = r.cav_advantage.unwrap();
        let rem = r.effect_remaining_hdv.unwrap();
        pass &= frac >= 0.95 && adv > 1.0 && rem < 1.0;
        details.push(format!("seed {seed}: frac_a_cav={frac:.3} tau/rho={adv:.4} tau_b/tau={rem:.4}"));
    }
    report("AC-02 selfish share 0.1", pass, details.join("; "));
}

#[test]
fn ac03_selfish_large_share() {
    let (_, _, r) = summarize(&scenario(Strategy::Selfish, 0.8, PINNED_SEEDS[0]));
    let rem = r.effect_remaining_hdv.unwrap();
    let change = r.effect_change_to_cav.unwrap();
    report(
        "AC-03 selfish share 0.8",
        rem > 1.0 && change > 1.0,
        format!("tau_b/tau={rem:.4} > 1, tau_b/rho={change:.4} > 1"),
    );
}

#[test]
fn ac04_social_small_share() {
    let (_, w, _) = summarize(&scenario(Strategy::Social, 0.1, PINNED_SEEDS[0]));
    let frac = w.frac_a_cav.unwrap();
    report("AC-04 social share 0.1", frac <= 0.05, format!("frac_a_cav={frac:.4} <= 0.05"));
}

#[test]
fn ac05_social_full_share() {
    let (log, w, _) = summarize(&scenario(Strategy::Social, 1.0, PINNED_SEEDS[0]));
    let gap = w.opt_gap.unwrap();
    let net = TwoRouteNetwork::default();
    let mday = log.config.mday();
    let mismatched = log
        .records
        .iter()
        .filter(|r| r.day > mday)
        .filter(|r| r.q_a() != system_optimum(&net, r.total()).unwrap().0)
        .count();
    report(
        "AC-05 social share 1.0",
        gap < 0.05 && mismatched == 0,
        format!("opt gap {gap:.6} < 0.05, days off the optimum split: {mismatched}"),
    );
}

/// Independent exhaustive scan of the mean travel time on the default network.
fn oracle_system_optimum(q_total: usize) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for q_a in 0..=q_total {
        let (a, b) = (q_a as f64, (q_total - q_a) as f64);
        let t_a = 5.0 + 5.0 * (a / 500.0) * (a / 500.0);
        let t_b = 15.0 + 15.0 * (b / 800.0) * (b / 800.0);
        let s = (a * t_a + b * t_b) / q_total as f64;
        if s < best.1 {
            best = (q_a, s);
        }
    }
    best
}

#[test]
fn ac06_system_optimum_location() {
    let (q, s) = system_optimum(&TwoRouteNetwork::default(), 1000).unwrap();
    let (oracle_q, oracle_s) = oracle_system_optimum(1000);
    let frac = q as f64 / 1000.0;
    report(
        "AC-06 system optimum",
        (0.57..=0.63).contains(&frac) && q == oracle_q && (s - oracle_s).abs() < 1e-9,
        format!("q_A*={q} (oracle {oracle_q}), fraction {frac:.3} in [0.57, 0.63], S_O={s:.6}"),
    );
}

#[test]
fn ac07_altruistic() {
    let (_, w, r) = summarize(&scenario(Strategy::Altruistic, 0.2, PINNED_SEEDS[0]));
    let frac = w.frac_a_cav.unwrap();
    let rem = r.effect_remaining_hdv.unwrap();
    report(
        "AC-07 altruistic share 0.2",
        frac >= 0.95 && rem > 1.0,
        format!("frac_a_cav={frac:.4} >= 0.95, tau_b/tau={rem:.4} > 1"),
    );
}

#[test]
fn ac08_malicious_oscillation() {
    let variance = |strategy, seed| {
        let log = run_scenario(&scenario(strategy, 0.6, seed)).unwrap();
        window_variance(&log, (301, 400), DayField::MeanHdvTime).unwrap().unwrap()
    };
    let malicious = variance(Strategy::Malicious, PINNED_SEEDS[0]);
    let selfish = variance(Strategy::Selfish, PINNED_SEEDS[0]);
    let factor = malicious / selfish;
    if factor >= 2.0 {
        report(
            "AC-08 malicious oscillation",
            true,
            format!("var malicious {malicious:.5} / var selfish {selfish:.5} = {factor:.2} >= 2"),
        );
    } else {
        let all_strict = PINNED_SEEDS
            .iter()
            .all(|&seed| variance(Strategy::Malicious, seed) > variance(Strategy::Selfish, seed));
        report(
            "AC-08 malicious oscillation (fallback)",
            all_strict,
            format!("factor {factor:.2} < 2; strict inequality at all pinned seeds: {all_strict}"),
        );
    }
}

#[test]
fn ac09_congestion() {
    let heavy = ScenarioConfig {
        congestion: 2.6,
        ..scenario(Strategy::Selfish, 0.4, PINNED_SEEDS[0])
    };
    let (_, _, r) = summarize(&heavy);
    let ratios = [
        r.cav_advantage.unwrap(),
        r.effect_change_to_cav.unwrap(),
        r.effect_remaining_hdv.unwrap(),
        r.perceived_effect_remaining_hdv.unwrap(),
    ];
    let rigid = ratios.iter().all(|x| (0.95..=1.05).contains(x));
    let light = ScenarioConfig {
        congestion: 0.25,
        ..heavy
    };
    let (_, _, r_light) = summarize(&light);
    let rem_light = r_light.effect_remaining_hdv.unwrap();
    report(
        "AC-09 congestion",
        rigid && rem_light < 1.0,
        format!("C=2.6 ratios {ratios:.4?} within [0.95, 1.05]; C=0.25 tau_b/tau={rem_light:.4} < 1"),
    );
}

#[test]
fn ac10_bias_sensitivity() {
    let with_beta = |beta| {
        let mut c = scenario(Strategy::Selfish, 0.05, PINNED_SEEDS[0]);
        c.human_params.taste_spread = beta;
        summarize(&c).2.cav_advantage.unwrap()
    };
    let high = with_beta(1000.0);
    let low = with_beta(0.01);
    report(
        "AC-10 bias sensitivity",
        high > low,
        format!("tau/rho at beta=1000 {high:.4} > at beta=0.01 {low:.4}"),
    );
}

#[test]
fn ac11_reproducibility_t_test() {
    let seeds: Vec<u64> = (1..=10).collect();
    let comparison = PairedComparison::within(scenario(Strategy::Selfish, 0.1, 0), Metric::TauB, Metric::Tau);
    let outcome = replicate_and_test(&comparison, &seeds, Execution::Parallel).unwrap();
    let (pass, detail) = match outcome {
        TTestOutcome::Test(r) => (
            r.degrees_of_freedom == 9 && r.t_statistic.abs() > 4.781 && r.significant_at_0_001,
            format!("t={:.3}, df={}, |t| > 4.781", r.t_statistic, r.degrees_of_freedom),
        ),
        other => (false, format!("{other:?}")),
    };
    report("AC-11 paired t-test tau_b vs tau", pass, detail);
}

#[test]
fn ac12_determinism() {
    let spec = parse_config(&json!({
        "cav_share": [0.0, 0.3], "strategy": ["Selfish", "Malicious"], "seeds": [5, 6]
    }))
    .unwrap();
    let run = |execution| {
        let dir = tempfile::tempdir().unwrap();
        let options = RunOptions {
            out_dir: dir.path().to_owned(),
            execution,
            write_daily: true,
        };
        let report = run_experiment(&spec, &options).unwrap();
        let mut files = vec![std::fs::read(&report.summary_path).unwrap()];
        for p in &report.daily_paths {
            files.push(std::fs::read(p).unwrap());
        }
        files
    };
    let first = run(Execution::Parallel);
    let second = run(Execution::Sequential);
    report(
        "AC-12 determinism",
        first == second && first.len() == 9,
        format!("{} files byte-identical across two executions", first.len()),
    );
}

#[test]
fn ac13_unit_property_suites() {
    let mut checks: Vec<(&str, bool)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(13);

    // BPR monotonicity and capacity doubling
    let mut bpr = true;
    for _ in 0..1000 {
        let p = RouteParams::new(rng.gen_range(0.5..50.0), rng.gen_range(10.0..3000.0), rng.gen_range(1.1..5.0)).unwrap();
        let f = rng.gen_range(0.0..5000.0);
        bpr &= p.travel_time(f).unwrap() < p.travel_time(f + rng.gen_range(0.1..100.0)).unwrap();
        bpr &= p.travel_time(p.capacity).unwrap() == 2.0 * p.free_flow_time;
    }
    checks.push(("BPR monotone, capacity doubles", bpr));

    // learning bounds and unused-route immutability
    let mut learning = true;
    for _ in 0..1000 {
        let est = EstimateVector {
            t_a_hat: rng.gen_range(1.0..100.0),
            t_b_hat: rng.gen_range(1.0..100.0),
        };
        let t = rng.gen_range(1.0..100.0);
        let next = update_estimate(est, Route::B, t, rng.gen_range(0.0..=1.0)).unwrap();
        learning &= next.t_a_hat == est.t_a_hat;
        learning &= next.t_b_hat >= est.t_b_hat.min(t) - 1e-12 && next.t_b_hat <= est.t_b_hat.max(t) + 1e-12;
    }
    checks.push(("learning convex combination, unused route fixed", learning));

    // logit normalization, translation invariance, small-spread limit
    let mut logit = true;
    for _ in 0..1000 {
        let (a, b, beta, c) = (
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.0..100.0),
            rng.gen_range(0.01..1000.0),
            rng.gen_range(-50.0..50.0),
        );
        logit &= (logit_probability(a, b, beta) + logit_probability(b, a, beta) - 1.0).abs() < 1e-12;
        logit &= (logit_probability(a + c, b + c, beta) - logit_probability(a, b, beta)).abs() < 1e-9;
    }
    logit &= logit_probability(5.0, 15.0, 1e-4) == 1.0;
    checks.push(("logit normalized, shift invariant, beta->0 limit", logit));

    // Gumbel moments
    let beta = 5.0;
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_taste(rng.sample(Open01), beta).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let pi = std::f64::consts::PI;
    let target_var = pi * pi * beta * beta / 6.0;
    let gumbel = mean.abs() < 0.01 * beta * pi / 6f64.sqrt() && (var / target_var - 1.0).abs() < 0.02;
    checks.push(("Gumbel moments (1e6 draws)", gumbel));

    // fleet global minimality against exhaustive enumeration
    let net = TwoRouteNetwork::default();
    let mut minimal = true;
    for _ in 0..1000 {
        let w = Strategy::ALL[rng.gen_range(0..5)].weights();
        let (ha, hb, q) = (rng.gen_range(0..1500), rng.gen_range(0..1500), rng.gen_range(0..1000));
        let d = fleet_optimize(&w, ha, hb, q, &net);
        let oracle = (0..=q)
            .map(|x| {
                let (qa, qb) = ((ha + x) as f64, (hb + q - x) as f64);
                let (ta, tb) = (5.0 * (1.0 + (qa / 500.0).powi(2)), 15.0 * (1.0 + (qb / 800.0).powi(2)));
                w.lambda_cav * (x as f64 * ta + (q - x) as f64 * tb) + w.lambda_hdv * (ha as f64 * ta + hb as f64 * tb)
            })
            .fold(f64::INFINITY, f64::min);
        minimal &= d.objective_value <= oracle + 1e-9 * oracle.abs().max(1.0);
    }
    checks.push(("fleet optimum is global (1000 instances)", minimal));

    // Social fleet vs system optimum
    let mut social = true;
    for q in [1, 2, 17, 250, 999, 1000, 2600] {
        let d = fleet_optimize(&Strategy::Social.weights(), 0, 0, q, &net);
        let (_, s_o) = system_optimum(&net, q).unwrap();
        social &= (d.objective_value / q as f64 - s_o).abs() < 1e-9;
    }
    checks.push(("social fleet attains system optimum", social));

    // equity gap zero iff equal times
    let mut equity = equity_gap(400, 600, 12.5, 12.5) == 0.0;
    for _ in 0..1000 {
        let (qa, qb) = (rng.gen_range(1..2000), rng.gen_range(1..2000));
        let ta = rng.gen_range(1.0..50.0);
        equity &= equity_gap(qa, qb, ta, ta + rng.gen_range(0.01..20.0)) > 0.0;
    }
    checks.push(("equity gap zero iff equal route times", equity));

    // t-test hand example
    let d: Vec<f64> = (1..=10).map(f64::from).collect();
    let t_ok = match paired_t_test(&d, &[0.0; 10]).unwrap() {
        TTestOutcome::Test(r) => (r.t_statistic - 5.745).abs() <= 0.001,
        _ => false,
    };
    checks.push(("t-test d=1..10 gives 5.745", t_ok));

    let failed: Vec<_> = checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    report(
        "AC-13 unit/property suites",
        failed.is_empty(),
        format!("{} checks, failed: {failed:?} (gumbel mean {mean:.4}, var {var:.3} vs {target_var:.3})", checks.len()),
    );
}

#[test]
fn ac14_full_sweep_budget() {
    let spec = parse_config(&json!({
        "strategy": ["Selfish", "Altruistic", "Malicious", "Disruptive", "Social"],
        "cav_share": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        "seeds": [1]
    }))
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let options = RunOptions {
        out_dir: dir.path().to_owned(),
        execution: Execution::Parallel,
        write_daily: true,
    };
    let start = Instant::now();
    let result = run_experiment(&spec, &options).unwrap();
    let elapsed = start.elapsed();
    report(
        "AC-14 full sweep runtime",
        result.rows.len() == 55 && elapsed < Duration::from_secs(300),
        format!("{} runs in {elapsed:?} < 5 min", result.rows.len()),
    );
}
