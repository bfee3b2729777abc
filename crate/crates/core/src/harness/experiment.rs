//! Runs (config, seed) pairs into `RunRecord`s, and whole horizon grids
//! into slope studies.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::benchmark::Benchmark;
use super::episode::{run_episode, RoundRecord};
use super::policy::PolicySpec;
use super::regret::{compute_regret, fit_slope, mean_stderr, sample_schedule, CurvePoint};
use super::scenario::{InstanceSource, MenuSpec, Scenario};
use crate::error::{invalid, Result};
use crate::instances::ArrivalProcess;

/// What the utilities inside the regret are.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretBasis {
    /// Greedy agents: realized utilities, which are deterministic given the
    /// arrival.
    Realized,
    /// Smooth agents: `sum_t E[U(pi_t, j_t)]` for both the learner and the
    /// comparator, the expectation taken over the agent's randomization.
    Expected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkInfo {
    /// Index into the oracle candidate set.
    pub index: usize,
    pub incentive: Vec<f64>,
    pub value: f64,
    /// Documented gap between the candidate maximum and the true supremum.
    pub slack: f64,
    pub candidates: usize,
    pub basis: RegretBasis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub policy: String,
    pub instance: String,
    pub horizon: u64,
    pub menu_size: usize,
    pub benchmark: BenchmarkInfo,
    pub regret_curve: Vec<CurvePoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundRecord>,
    /// Kept out of the serialized record so that reruns are byte-identical.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.regret_curve.last().map_or(0.0, |p| p.regret)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Stable short hash of anything serializable.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct HashedConfig<'a> {
    instance: &'a str,
    menu_size: usize,
    policy: &'a PolicySpec,
    horizon: u64,
    menu_hash: String,
}

pub fn run_id(instance: &str, policy: &str, horizon: u64, seed: u64) -> String {
    format!("{instance}-{}-T{horizon}-s{seed:04}", policy.replace(':', "_"))
}

/// One episode on a prepared scenario.
pub fn run_scenario(scenario: &Scenario, policy: &PolicySpec, seed: u64, keep_rounds: bool) -> Result<RunRecord> {
    let start = Instant::now();
    let horizon = scenario.horizon;
    let mut learner = policy.build(&scenario.menu, scenario.greedy(), horizon)?;
    let mut arrivals = ArrivalProcess::new(scenario.arrivals.clone(), scenario.env.num_agents())?;
    let trace = run_episode(
        &scenario.env,
        &scenario.menu,
        learner.as_mut(),
        &mut arrivals,
        horizon,
        seed,
        scenario.arrival_seed,
    )?;
    let bench = Benchmark::new(&scenario.env, &scenario.oracle)?;
    let points = sample_schedule(horizon);
    let best = bench.curve(&trace.arrivals, &points)?;
    let values: Vec<f64> = best.iter().map(|h| h.value).collect();
    let regret_curve = compute_regret(&trace.expected_utilities, &points, &values)?;
    let last = *best.last().expect("schedule is nonempty for T >= 1");
    let basis = if scenario.env.is_greedy() {
        RegretBasis::Realized
    } else {
        RegretBasis::Expected
    };
    let label = policy.label();
    let menu_hash = config_hash(&scenario.menu.to_records())?;
    let hash = config_hash(&HashedConfig {
        instance: &scenario.name,
        menu_size: scenario.menu.len(),
        policy,
        horizon,
        menu_hash,
    })?;
    Ok(RunRecord {
        run_id: run_id(&scenario.name, &label, horizon, seed),
        config_hash: hash,
        seed,
        policy: label,
        instance: scenario.name.clone(),
        horizon,
        menu_size: scenario.menu.len(),
        benchmark: BenchmarkInfo {
            index: last.index,
            incentive: scenario
                .oracle
                .get(last.index)
                .expect("benchmark index")
                .values()
                .to_vec(),
            value: last.value,
            slack: scenario.oracle_slack,
            candidates: scenario.oracle.len(),
            basis,
        },
        regret_curve,
        rounds: if keep_rounds { trace.rounds } else { Vec::new() },
        wall_clock: start.elapsed(),
    })
}

/// Runs every seed (in parallel) and returns records sorted by run id.
pub fn run_seeds(scenario: &Scenario, policy: &PolicySpec, seeds: &[u64], keep_rounds: bool) -> Result<Vec<RunRecord>> {
    if seeds.is_empty() {
        return invalid("at least one seed is required");
    }
    let mut out = seeds
        .par_iter()
        .map(|&s| run_scenario(scenario, policy, s, keep_rounds))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub run_id: String,
    pub t: u64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
    pub policy: String,
    pub instance: String,
    pub seed_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instance: String,
    pub policy: String,
    pub horizons: Vec<u64>,
    pub seeds: Vec<u64>,
    pub slope: Option<f64>,
    pub max_oracle_slack: f64,
    pub basis: RegretBasis,
    pub rows: Vec<BenchRow>,
}

pub const CSV_HEADER: &str = "run_id,t,regret_mean,regret_stderr,policy,instance,seed_count";

impl BenchSummary {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.run_id, r.t, r.regret_mean, r.regret_stderr, r.policy, r.instance, r.seed_count
        ));
    }
    s
}

/// Multi-horizon study: for each `T` the scenario is rebuilt (menus and
/// hard instances depend on `T`), every seed is run, and the final regrets
/// are averaged. The slope is fitted to `ln(mean regret)` against `ln T`
/// when every mean is positive.
pub fn bench(
    source: &InstanceSource,
    menu: &MenuSpec,
    policy: &PolicySpec,
    horizons: &[u64],
    seeds: &[u64],
) -> Result<BenchSummary> {
    if horizons.is_empty() {
        return invalid("bench needs at least one horizon");
    }
    let label = policy.label();
    let mut rows = Vec::with_capacity(horizons.len());
    let mut max_slack: f64 = 0.0;
    let mut basis = RegretBasis::Realized;
    let mut name = source.label();
    for &t in horizons {
        let scenario = Scenario::from_source(source, menu, t)?;
        name.clone_from(&scenario.name);
        let records = run_seeds(&scenario, policy, seeds, false)?;
        let finals: Vec<f64> = records.iter().map(RunRecord::final_regret).collect();
        let (mean, se) = mean_stderr(&finals);
        max_slack = max_slack.max(scenario.oracle_slack);
        basis = records[0].benchmark.basis;
        log::info!("{name} {label} T={t}: regret {mean:.3} +- {se:.3}");
        rows.push(BenchRow {
            run_id: format!("{name}-{}-T{t}", label.replace(':', "_")),
            t,
            regret_mean: mean,
            regret_stderr: se,
            policy: label.clone(),
            instance: name.clone(),
            seed_count: seeds.len(),
        });
    }
    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.regret_mean > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|r| r.t as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.regret_mean).collect();
        Some(fit_slope(&xs, &ys)?)
    } else {
        None
    };
    Ok(BenchSummary {
        instance: name,
        policy: label,
        horizons: horizons.to_vec(),
        seeds: seeds.to_vec(),
        slope,
        max_oracle_slack: max_slack,
        basis,
        rows,
    })
}
