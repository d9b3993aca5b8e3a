//! Simultaneous confidence regions, the test decision, p-values and the
//! data-driven choice of the standardization exponent `tau`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    check_tau, observed_pivot_from_summaries, Bootstrap, BootstrapDistribution, FactorMethod,
    ObservedPivot, DEFAULT_REPLICATES,
};
use crate::data::{Dataset, PairSet};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::summary::{centered, group_summary, pooled_scale, GroupSummary};

/// Default candidate grid `0, 0.1, ..., 0.9, 0.99`.
pub const DEFAULT_TAU_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];
pub const DEFAULT_SIZE_RESAMPLES: usize = 100;

const STREAM_MAIN: u64 = 0;
const STREAM_SIZE: u64 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    TwoSided,
    /// `H1: mu_k(j) > mu_l(j)` for some triple; regions `[lower, +inf)`.
    Upper,
    /// `H1: mu_k(j) < mu_l(j)` for some triple; regions `(-inf, upper]`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TauPolicy {
    Fixed { tau: f64 },
    Auto { grid: Vec<f64>, size_resamples: usize },
}

impl TauPolicy {
    pub fn auto_default() -> Self {
        TauPolicy::Auto {
            grid: DEFAULT_TAU_GRID.to_vec(),
            size_resamples: DEFAULT_SIZE_RESAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestConfig {
    pub rho: f64,
    pub tau_policy: TauPolicy,
    pub replicates: usize,
    pub side: Side,
    pub seed: u64,
    /// `None` tests all pairs.
    pub pairs: Option<PairSet>,
    pub factor: FactorMethod,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            rho: 0.05,
            tau_policy: TauPolicy::Fixed { tau: 0.8 },
            replicates: DEFAULT_REPLICATES,
            side: Side::TwoSided,
            seed: 0,
            pairs: None,
            factor: FactorMethod::default(),
        }
    }
}

impl TestConfig {
    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau_policy = TauPolicy::Fixed { tau };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig(format!("rho {} is outside (0, 1)", self.rho)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        match &self.tau_policy {
            TauPolicy::Fixed { tau } => check_tau(*tau)?,
            TauPolicy::Auto { grid, size_resamples } => {
                if grid.is_empty() {
                    return Err(Error::InvalidConfig("tau grid is empty".into()));
                }
                for &t in grid {
                    check_tau(t)?;
                }
                if *size_resamples == 0 {
                    return Err(Error::InvalidConfig("size resamples must be at least 1".into()));
                }
            }
        }
        Ok(())
    }

    fn pair_set(&self, num_groups: usize) -> Result<PairSet> {
        match &self.pairs {
            Some(p) if p.max_group() >= num_groups => Err(Error::InvalidPairs(format!(
                "pair set refers to group {} but only {num_groups} groups exist",
                p.max_group()
            ))),
            Some(p) => Ok(p.clone()),
            None => Ok(PairSet::all(num_groups)),
        }
    }
}

/// One simultaneous confidence interval for `mu_k(j) - mu_l(j)`.
/// One-sided regions use infinite endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrEntry {
    pub k: usize,
    pub l: usize,
    pub j: usize,
    pub lower: f64,
    pub upper: f64,
    pub excludes_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCandidate {
    pub tau: f64,
    pub empirical_size: f64,
    pub p_value: f64,
    pub retained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDiagnostics {
    pub candidates: Vec<TauCandidate>,
    /// No candidate kept its size at the nominal level; the selected tau is
    /// the one with the smallest empirical size.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub reject: bool,
    pub p_value: f64,
    pub tau_used: f64,
    pub rho: f64,
    pub side: Side,
    pub pairs: PairSet,
    pub scr: Vec<ScrEntry>,
    pub significant: Vec<(usize, usize, usize)>,
    pub tau_diagnostics: Option<TauDiagnostics>,
}

fn scale_power(sigma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        1.0
    } else {
        sigma.powf(tau)
    }
}

/// Quantiles `(q_M, q_L)` bounding the regions at level `rho`. Missing
/// sides are returned as `+inf` / `-inf`.
fn region_quantiles(dist: &BootstrapDistribution, rho: f64, side: Side) -> Result<(f64, f64)> {
    Ok(match side {
        Side::TwoSided => (dist.quantile_m(1.0 - rho / 2.0)?, dist.quantile_l(rho / 2.0)?),
        Side::Upper => (dist.quantile_m(1.0 - rho)?, f64::NEG_INFINITY),
        Side::Lower => (f64::INFINITY, dist.quantile_l(rho)?),
    })
}

pub fn build_scr(
    data: &Dataset,
    pairs: &PairSet,
    dist: &BootstrapDistribution,
    tau: f64,
    rho: f64,
    side: Side,
) -> Result<Vec<ScrEntry>> {
    let summaries: Vec<GroupSummary> = data.groups().iter().map(group_summary).collect();
    build_scr_from_summaries(&summaries, pairs, dist, tau, rho, side)
}

pub fn build_scr_from_summaries(
    summaries: &[GroupSummary],
    pairs: &PairSet,
    dist: &BootstrapDistribution,
    tau: f64,
    rho: f64,
    side: Side,
) -> Result<Vec<ScrEntry>> {
    check_tau(tau)?;
    let (q_m, q_l) = region_quantiles(dist, rho, side)?;
    let mut out = Vec::new();
    for &(k, l) in pairs.pairs() {
        let ps = pooled_scale(&summaries[k], &summaries[l]);
        let root_n = ps.harmonic_n.sqrt();
        for j in 0..ps.sigma.len() {
            if tau > 0.0 && ps.sigma[j] == 0.0 {
                return Err(Error::DegenerateCoordinate { k, l, j });
            }
            let diff = summaries[k].mean[j] - summaries[l].mean[j];
            let width = scale_power(ps.sigma[j], tau) / root_n;
            let lower = match side {
                Side::Lower => f64::NEG_INFINITY,
                _ => diff - q_m * width,
            };
            let upper = match side {
                Side::Upper => f64::INFINITY,
                _ => diff - q_l * width,
            };
            out.push(ScrEntry {
                k,
                l,
                j,
                lower,
                upper,
                excludes_zero: !(lower <= 0.0 && 0.0 <= upper),
            });
        }
    }
    Ok(out)
}

/// Rejects when any region excludes zero; returns the offending triples.
pub fn decide(scr: &[ScrEntry]) -> (bool, Vec<(usize, usize, usize)>) {
    let significant: Vec<_> = scr
        .iter()
        .filter(|e| e.excludes_zero)
        .map(|e| (e.k, e.l, e.j))
        .collect();
    (!significant.is_empty(), significant)
}

/// Whether every region at level `rho` contains zero.
fn all_contain_zero(
    pivot: &ObservedPivot,
    dist: &BootstrapDistribution,
    rho: f64,
    side: Side,
) -> bool {
    let (q_m, q_l) = region_quantiles(dist, rho, side).expect("level inside (0, 1)");
    pivot.t_max <= q_m && pivot.t_min >= q_l
}

/// Largest level `rho` at which every region still contains zero.
///
/// The feasible levels form an interval starting at 0 (both quantile
/// constraints tighten as `rho` grows), so the boundary is located by
/// bisection; 64 halvings resolve it far below `1/(2B)`.
pub fn p_value(pivot: &ObservedPivot, dist: &BootstrapDistribution, side: Side) -> f64 {
    const EDGE: f64 = 1e-15;
    if !all_contain_zero(pivot, dist, EDGE, side) {
        return 0.0;
    }
    if all_contain_zero(pivot, dist, 1.0 - EDGE, side) {
        return 1.0;
    }
    let (mut lo, mut hi) = (EDGE, 1.0 - EDGE);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if all_contain_zero(pivot, dist, mid, side) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Level-`rho` decision computed from the pivot; equivalent to
/// `decide(build_scr(..))`.
fn rejects(pivot: &ObservedPivot, dist: &BootstrapDistribution, rho: f64, side: Side) -> bool {
    !all_contain_zero(pivot, dist, rho, side)
}

fn summaries_of(data: &Dataset) -> Vec<GroupSummary> {
    data.groups().iter().map(group_summary).collect()
}

/// Full procedure: resolve tau, bootstrap, build regions, decide, p-value.
pub fn run_test(data: &Dataset, config: &TestConfig) -> Result<TestResult> {
    config.validate()?;
    let pairs = config.pair_set(data.num_groups())?;
    let summaries = summaries_of(data);
    let main_key = StreamKey::root(config.seed).child(STREAM_MAIN);

    let (tau, dist, diagnostics) = match &config.tau_policy {
        TauPolicy::Fixed { tau } => {
            let boot = Bootstrap::new(data, &pairs, &[*tau], config.factor)?;
            let dist = boot.run(config.replicates, main_key).pop().expect("one tau");
            (*tau, dist, None)
        }
        TauPolicy::Auto { grid, size_resamples } => {
            let sel = select_tau_inner(data, &pairs, config, grid, *size_resamples)?;
            (sel.tau, sel.dist, Some(sel.diagnostics))
        }
    };

    let pivot = observed_pivot_from_summaries(&summaries, &pairs, tau)?;
    let scr = build_scr_from_summaries(&summaries, &pairs, &dist, tau, config.rho, config.side)?;
    let (reject, significant) = decide(&scr);
    let p = p_value(&pivot, &dist, config.side);
    Ok(TestResult {
        reject,
        p_value: p,
        tau_used: tau,
        rho: config.rho,
        side: config.side,
        pairs,
        scr,
        significant,
        tau_diagnostics: diagnostics,
    })
}

struct Selection {
    tau: f64,
    dist: BootstrapDistribution,
    diagnostics: TauDiagnostics,
}

/// Picks tau from the policy's grid.
///
/// For every candidate the empirical size is the rejection fraction of the
/// level-`rho` test over datasets obtained by centering each group and
/// resampling its rows with replacement. Candidates with size at most
/// `rho` are retained and the one with the smallest p-value on the original
/// data wins (ties go to the smaller tau). If none is retained the
/// candidate with the smallest size is used and the diagnostics say so.
pub fn select_tau(data: &Dataset, config: &TestConfig) -> Result<(f64, TauDiagnostics)> {
    config.validate()?;
    let TauPolicy::Auto { grid, size_resamples } = &config.tau_policy else {
        return Err(Error::InvalidConfig("select_tau needs the auto tau policy".into()));
    };
    let pairs = config.pair_set(data.num_groups())?;
    let sel = select_tau_inner(data, &pairs, config, grid, *size_resamples)?;
    Ok((sel.tau, sel.diagnostics))
}

fn select_tau_inner(
    data: &Dataset,
    pairs: &PairSet,
    config: &TestConfig,
    grid: &[f64],
    size_resamples: usize,
) -> Result<Selection> {
    let mut taus = grid.to_vec();
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    let root = StreamKey::root(config.seed);
    let summaries = summaries_of(data);
    let boot = Bootstrap::new(data, pairs, &taus, config.factor)?;
    let dists = boot.run(config.replicates, root.child(STREAM_MAIN));
    let p_values = taus
        .iter()
        .zip(&dists)
        .map(|(&tau, dist)| {
            let pivot = observed_pivot_from_summaries(&summaries, pairs, tau)?;
            Ok(p_value(&pivot, dist, config.side))
        })
        .collect::<Result<Vec<f64>>>()?;

    let sizes = estimate_sizes(data, pairs, config, &taus, size_resamples, root.child(STREAM_SIZE))?;

    let candidates: Vec<TauCandidate> = taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| TauCandidate {
            tau,
            empirical_size: sizes[i],
            p_value: p_values[i],
            retained: sizes[i] <= config.rho,
        })
        .collect();

    // candidates are in ascending tau, strict comparisons keep the smallest on ties
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if c.retained && best.is_none_or(|b| c.p_value < candidates[b].p_value) {
            best = Some(i);
        }
    }
    let fallback = best.is_none();
    let chosen = best.unwrap_or_else(|| {
        let mut b = 0;
        for (i, c) in candidates.iter().enumerate() {
            if c.empirical_size < candidates[b].empirical_size {
                b = i;
            }
        }
        b
    });
    Ok(Selection {
        tau: taus[chosen],
        dist: dists[chosen].clone(),
        diagnostics: TauDiagnostics {
            candidates,
            fallback,
        },
    })
}

/// Each group centered at its own mean, rows resampled with replacement.
pub fn centered_resample<R: Rng + ?Sized>(data: &Dataset, rng: &mut R) -> Dataset {
    let groups = data
        .groups()
        .iter()
        .map(|g| {
            let c = centered(g);
            let n = c.nrows();
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            DMatrix::from_fn(n, c.ncols(), |i, j| c[(rows[i], j)])
        })
        .collect();
    Dataset::from_groups_unchecked(groups)
}

/// Empirical size of the level-`rho` test for each tau. Resample `r` uses
/// the streams under `key / r`, shared by all candidates.
fn estimate_sizes(
    data: &Dataset,
    pairs: &PairSet,
    config: &TestConfig,
    taus: &[f64],
    resamples: usize,
    key: StreamKey,
) -> Result<Vec<f64>> {
    let per_resample: Vec<Vec<bool>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let rk = key.child(r as u64);
            let resampled = centered_resample(data, &mut rk.child(0).rng());
            let summaries = summaries_of(&resampled);
            let boot = Bootstrap::new(&resampled, pairs, taus, config.factor)?;
            let dists = boot.run(config.replicates, rk.child(1));
            taus.iter()
                .zip(&dists)
                .map(|(&tau, dist)| {
                    let pivot = observed_pivot_from_summaries(&summaries, pairs, tau)?;
                    Ok(rejects(&pivot, dist, config.rho, config.side))
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..taus.len())
        .map(|t| per_resample.iter().filter(|r| r[t]).count() as f64 / resamples as f64)
        .collect())
}
