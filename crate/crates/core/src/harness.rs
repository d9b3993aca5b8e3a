//! Monte-Carlo estimation of empirical size and power.
//!
//! Replicate `r` of a scenario draws its data from stream
//! `seed / 0 / r` and seeds its test from `seed / 1 / r`, so results are
//! identical for any number of worker threads. The same replicate streams
//! are reused for every effect size of a power curve.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::datagen::scenario::{scenario_build, Scenario};
use crate::datagen::ScenarioSampler;
use crate::error::{Error, Result};
use crate::inference::{run_test, TauPolicy, TestConfig};
use crate::rng::StreamKey;

/// One line of the replicate log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub scenario: String,
    pub rep_index: usize,
    pub theta: f64,
    pub reject: bool,
    pub p_value: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scenario: String,
    pub theta: f64,
    pub reps: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// Binomial Monte-Carlo standard error of the rate.
    pub mc_se: f64,
    pub tau_mean: f64,
    pub tau_sd: f64,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
    /// Wall-clock seconds per replicate; not serialized so that reports
    /// stay reproducible.
    #[serde(skip)]
    pub seconds_per_replicate: f64,
}

impl ExperimentResult {
    fn from_records(scenario: &str, theta: f64, records: Vec<ReplicateRecord>, seconds: f64) -> Self {
        let reps = records.len();
        let rejections = records.iter().filter(|r| r.reject).count();
        let rate = rejections as f64 / reps as f64;
        let tau_mean = records.iter().map(|r| r.tau).sum::<f64>() / reps as f64;
        let tau_var = records.iter().map(|r| (r.tau - tau_mean).powi(2)).sum::<f64>() / reps as f64;
        Self {
            scenario: scenario.to_string(),
            theta,
            reps,
            rejections,
            rejection_rate: rate,
            mc_se: (rate * (1.0 - rate) / reps as f64).sqrt(),
            tau_mean,
            tau_sd: tau_var.sqrt(),
            records,
            seconds_per_replicate: seconds / reps as f64,
        }
    }

    /// Re-aggregates a persisted replicate log.
    pub fn from_log(records: Vec<ReplicateRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::BadBudget("empty replicate log".into()))?;
        let (scenario, theta) = (first.scenario.clone(), first.theta);
        Ok(Self::from_records(&scenario, theta, records, 0.0))
    }
}

fn check_scenario(s: &Scenario) -> Result<()> {
    if s.reps == 0 {
        return Err(Error::BadBudget("replicate count must be at least 1".into()));
    }
    s.test.validate()
}

/// All replicates of `scenario` at effect size `theta`.
pub fn run_replicates(scenario: &Scenario, theta: f64) -> Result<ExperimentResult> {
    check_scenario(scenario)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidConfig(format!("theta {theta} is outside [0, 1]")));
    }
    let sampler = ScenarioSampler::new(scenario)?;
    run_with_sampler(scenario, &sampler, theta)
}

fn run_with_sampler(scenario: &Scenario, sampler: &ScenarioSampler, theta: f64) -> Result<ExperimentResult> {
    let start = Instant::now();
    let root = StreamKey::root(scenario.seed);
    let records = (0..scenario.reps)
        .into_par_iter()
        .map(|r| {
            let data = sampler.sample(theta, root.child(0).child(r as u64))?;
            let config = TestConfig {
                seed: root.child(1).child(r as u64).seed(),
                ..scenario.test.clone()
            };
            let res = run_test(&data, &config)?;
            Ok(ReplicateRecord {
                scenario: scenario.name.clone(),
                rep_index: r,
                theta,
                reject: res.reject,
                p_value: res.p_value,
                tau: res.tau_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult::from_records(
        &scenario.name,
        theta,
        records,
        start.elapsed().as_secs_f64(),
    ))
}

/// Empirical size: rejection rate under the scenario's null (`theta = 0`).
pub fn run_size(scenario: &Scenario) -> Result<ExperimentResult> {
    if scenario.theta != 0.0 {
        return Err(Error::InvalidConfig(format!(
            "size runs need theta = 0, got {}",
            scenario.theta
        )));
    }
    run_replicates(scenario, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub theta: f64,
    pub power: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub scenario: String,
    pub points: Vec<PowerPoint>,
    pub results: Vec<ExperimentResult>,
}

/// Rejection rate at each `theta` of `thetas` (which must contain 0).
pub fn run_power(scenario: &Scenario, thetas: &[f64]) -> Result<PowerCurve> {
    check_scenario(scenario)?;
    if !thetas.contains(&0.0) {
        return Err(Error::InvalidConfig("theta grid must include 0".into()));
    }
    if let Some(t) = thetas.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidConfig(format!("theta {t} is outside [0, 1]")));
    }
    let sampler = ScenarioSampler::new(scenario)?;
    let results = thetas
        .iter()
        .map(|&t| run_with_sampler(scenario, &sampler, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve {
        scenario: scenario.name.clone(),
        points: results
            .iter()
            .map(|r| PowerPoint {
                theta: r.theta,
                power: r.rejection_rate,
                mc_se: r.mc_se,
            })
            .collect(),
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub reps: usize,
    pub replicates: usize,
    pub tau_policy: TauPolicy,
    pub rho: f64,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            reps: 500,
            replicates: crate::bootstrap::DEFAULT_REPLICATES,
            tau_policy: TauPolicy::Fixed { tau: 0.8 },
            rho: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scenario: String,
    pub sizes: Vec<usize>,
    pub size: f64,
    pub mc_se: f64,
    pub tau_mean: f64,
    /// Reference size of this cell.
    pub reference: f64,
}

/// Reference sizes by catalog name.
pub fn reference_size(name: &str) -> Option<f64> {
    const CELLS: [(&str, f64); 24] = [
        ("fda-M1-common-balanced", 0.051),
        ("fda-M1-common-unbalanced", 0.053),
        ("fda-M2-common-balanced", 0.042),
        ("fda-M2-common-unbalanced", 0.057),
        ("fda-M3-common-balanced", 0.057),
        ("fda-M3-common-unbalanced", 0.056),
        ("fda-M4-common-balanced", 0.046),
        ("fda-M4-common-unbalanced", 0.053),
        ("fda-M1-specific-balanced", 0.055),
        ("fda-M1-specific-unbalanced", 0.043),
        ("fda-M2-specific-balanced", 0.056),
        ("fda-M2-specific-unbalanced", 0.052),
        ("fda-M3-specific-balanced", 0.051),
        ("fda-M3-specific-unbalanced", 0.049),
        ("fda-M4-specific-balanced", 0.052),
        ("fda-M4-specific-unbalanced", 0.050),
        ("pois-sparse-p25-balanced", 0.055),
        ("pois-sparse-p25-unbalanced", 0.052),
        ("pois-sparse-p100-balanced", 0.056),
        ("pois-sparse-p100-unbalanced", 0.056),
        ("pois-dense-p25-balanced", 0.050),
        ("pois-dense-p25-unbalanced", 0.045),
        ("pois-dense-p100-balanced", 0.057),
        ("pois-dense-p100-unbalanced", 0.051),
    ];
    CELLS.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
}

/// Catalog names making up a size table (`size-fda` or `size-pois`).
pub fn table_cells(name: &str) -> Result<Vec<String>> {
    let prefix = match name {
        "size-fda" => "fda-",
        "size-pois" => "pois-",
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(crate::datagen::scenario_catalog()
        .into_iter()
        .filter(|n| n.starts_with(prefix))
        .collect())
}

/// Empirical size of every cell of a size table under `budget`.
pub fn reproduce_table(name: &str, budget: &Budget) -> Result<Vec<TableRow>> {
    if budget.reps == 0 {
        return Err(Error::BadBudget("replicate count must be at least 1".into()));
    }
    if budget.replicates == 0 {
        return Err(Error::BadBudget("bootstrap size must be at least 1".into()));
    }
    table_cells(name)?
        .into_iter()
        .map(|cell| {
            let mut s = scenario_build(&cell)?;
            s.reps = budget.reps;
            s.seed = budget.seed;
            s.test = TestConfig {
                rho: budget.rho,
                tau_policy: budget.tau_policy.clone(),
                replicates: budget.replicates,
                ..TestConfig::default()
            };
            let r = run_size(&s)?;
            Ok(TableRow {
                reference: reference_size(&cell).unwrap_or(f64::NAN),
                scenario: cell,
                sizes: s.sizes.clone(),
                size: r.rejection_rate,
                mc_se: r.mc_se,
                tau_mean: r.tau_mean,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, reps: usize) -> Scenario {
        let mut s = scenario_build(name).unwrap();
        s.reps = reps;
        s.test.replicates = 200;
        s.seed = 11;
        s
    }

    #[test]
    fn single_replicate_rate_is_binary() {
        let r = run_size(&small("fda-M1-common-balanced", 1)).unwrap();
        assert!(r.rejection_rate == 0.0 || r.rejection_rate == 1.0);
        assert_eq!(r.records.len(), 1);
    }

    #[test]
    fn rate_is_recomputable_from_log() {
        let r = run_size(&small("pois-sparse-p25-unbalanced", 12)).unwrap();
        let again = ExperimentResult::from_log(r.records.clone()).unwrap();
        assert_eq!(again.rejection_rate, r.rejection_rate);
        assert_eq!(r.rejection_rate, r.rejections as f64 / 12.0);
    }

    #[test]
    fn power_at_zero_equals_size() {
        let s = small("fda-M2-common-balanced", 6);
        let curve = run_power(&s, &[0.0, 1.0]).unwrap();
        let size = run_size(&s).unwrap();
        assert_eq!(curve.results[0].records, size.records);
        assert_eq!(curve.points[0].power, size.rejection_rate);
    }

    #[test]
    fn bad_budgets() {
        let b = Budget { reps: 0, ..Budget::default() };
        assert!(matches!(reproduce_table("size-fda", &b), Err(Error::BadBudget(_))));
        assert!(matches!(run_size(&small("fda-M1-common-balanced", 0)), Err(Error::BadBudget(_))));
        assert!(run_power(&small("fda-M1-common-balanced", 2), &[0.5]).is_err());
        assert!(run_size(&small("fda-M1-common-balanced", 2).with_theta(0.5)).is_err());
    }

    #[test]
    fn table_layouts() {
        assert_eq!(table_cells("size-fda").unwrap().len(), 16);
        assert_eq!(table_cells("size-pois").unwrap().len(), 8);
        assert!(table_cells("size-x").is_err());
        for c in table_cells("size-fda").unwrap().iter().chain(&table_cells("size-pois").unwrap()) {
            assert!(reference_size(c).is_some());
        }
    }

    #[test]
    fn same_seed_same_result_any_thread_count() {
        let s = small("fda-M4-specific-unbalanced", 8);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_size(&s).unwrap());
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap().install(|| run_size(&s).unwrap());
        assert_eq!(one.records, many.records);
    }
}
