//! Observed pivots and the Gaussian bootstrap of the max/min statistics.
//!
//! For a pair `(k, l)` and coordinate `j` the partially standardized
//! difference of bootstrap draws is
//!
//! ```text
//! sqrt(n_l/(n_k+n_l)) S*_{k,j} / s_j^tau - sqrt(n_k/(n_k+n_l)) S*_{l,j} / s_j^tau
//! ```
//!
//! where `s_j` is the pooled scale of the pair. `M*` is its maximum over all
//! pairs and coordinates and `L*` the minimum. One draw `S*_k` per group is
//! shared by every pair within a replicate.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PairSet};
use crate::error::{Error, Result};
use crate::linalg::{centered_factor, psd_factor, standard_normals, Factor};
use crate::rng::StreamKey;
use crate::summary::{group_summary, pooled_scale, GroupSummary};

pub const DEFAULT_REPLICATES: usize = 1000;

/// How the bootstrap draws `S*_k ~ N(0, cov_k)` are generated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    /// `n^{-1/2} sum_i z_i (x_i - mean)`: exact factor of the sample
    /// covariance built from the centered data, `n_k` deviates per draw.
    #[default]
    Centered,
    /// Clipped symmetric eigendecomposition of the sample covariance.
    Eigen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub tau: f64,
    pub replicates: usize,
    pub seed: u64,
    pub pairs: PairSet,
    pub factor: FactorMethod,
}

impl BootstrapConfig {
    pub fn new(tau: f64, replicates: usize, seed: u64, pairs: PairSet) -> Self {
        Self {
            tau,
            replicates,
            seed,
            pairs,
            factor: FactorMethod::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidConfig(format!("tau {tau} is outside [0, 1)")));
    }
    Ok(())
}

/// Observed statistic `sqrt(n_kl) (mean_k(j) - mean_l(j)) / s_j^tau` per
/// triple, with its extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPivot {
    pub t_max: f64,
    pub t_min: f64,
    /// `(k, l, j, value)` in pair-major, coordinate-minor order.
    pub per_triple: Vec<(usize, usize, usize, f64)>,
}

/// Sorted bootstrap replicates of `M*` and `L*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    pub m_star: Vec<f64>,
    pub l_star: Vec<f64>,
}

impl BootstrapDistribution {
    /// Sorts the replicate values.
    pub fn from_replicates(mut m_star: Vec<f64>, mut l_star: Vec<f64>) -> Self {
        m_star.sort_by(f64::total_cmp);
        l_star.sort_by(f64::total_cmp);
        Self { m_star, l_star }
    }

    pub fn replicates(&self) -> usize {
        self.m_star.len()
    }

    pub fn quantile_m(&self, beta: f64) -> Result<f64> {
        empirical_quantile(&self.m_star, beta)
    }

    pub fn quantile_l(&self, beta: f64) -> Result<f64> {
        empirical_quantile(&self.l_star, beta)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            m_star: self.m_star.iter().map(|v| v * c).collect(),
            l_star: self.l_star.iter().map(|v| v * c).collect(),
        }
    }
}

/// The `ceil(beta * B)`-th order statistic of `sorted` (right-continuous
/// inverse of the empirical distribution function).
pub fn empirical_quantile(sorted: &[f64], beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadQuantileLevel(beta));
    }
    assert!(!sorted.is_empty(), "empirical_quantile on an empty sample");
    Ok(sorted[order_index(sorted.len(), beta) - 1])
}

/// 1-based index `ceil(beta * b)`.
fn order_index(b: usize, beta: f64) -> usize {
    ((beta * b as f64).ceil() as usize).clamp(1, b)
}

/// `s^tau` with the convention `s^0 = 1` even for `s = 0`.
fn scale_power(sigma: f64, tau: f64) -> f64 {
    if tau == 0.0 {
        1.0
    } else {
        sigma.powf(tau)
    }
}

#[derive(Debug, Clone)]
struct PairTerms {
    k: usize,
    l: usize,
    coef_k: f64,
    coef_l: f64,
    /// `1 / s_j^tau`, one vector per tau.
    inv_scale: Vec<DVector<f64>>,
}

/// Everything a replicate needs besides the random draws: the pair weights
/// and the reciprocal scales for each candidate `tau`.
#[derive(Debug, Clone)]
pub struct ReplicateKernel {
    taus: Vec<f64>,
    pairs: Vec<PairTerms>,
    dim: usize,
}

impl ReplicateKernel {
    pub fn new(summaries: &[GroupSummary], pairs: &PairSet, taus: &[f64]) -> Result<Self> {
        if pairs.max_group() >= summaries.len() {
            return Err(Error::InvalidPairs(format!(
                "pair set refers to group {} but only {} groups exist",
                pairs.max_group(),
                summaries.len()
            )));
        }
        for &t in taus {
            check_tau(t)?;
        }
        let dim = summaries.first().map_or(0, GroupSummary::dim);
        let mut terms = Vec::with_capacity(pairs.len());
        for &(k, l) in pairs.pairs() {
            let ps = pooled_scale(&summaries[k], &summaries[l]);
            let mut inv_scale = Vec::with_capacity(taus.len());
            for &tau in taus {
                if tau > 0.0 {
                    if let Some(j) = ps.sigma.iter().position(|&s| s == 0.0) {
                        return Err(Error::DegenerateCoordinate { k, l, j });
                    }
                }
                inv_scale.push(ps.sigma.map(|s| 1.0 / scale_power(s, tau)));
            }
            terms.push(PairTerms {
                k,
                l,
                coef_k: ps.weight_k.sqrt(),
                coef_l: ps.weight_l.sqrt(),
                inv_scale,
            });
        }
        Ok(Self {
            taus: taus.to_vec(),
            pairs: terms,
            dim,
        })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// The full per-(pair, coordinate) array for one set of draws.
    pub fn values(&self, draws: &[DVector<f64>], tau_index: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.pairs.len() * self.dim);
        for pt in &self.pairs {
            let (sk, sl) = (&draws[pt.k], &draws[pt.l]);
            let inv = &pt.inv_scale[tau_index];
            for j in 0..self.dim {
                out.push((pt.coef_k * sk[j] - pt.coef_l * sl[j]) * inv[j]);
            }
        }
        out
    }

    /// `(max, min)` of [`Self::values`] without materializing the array.
    pub fn extremes(&self, draws: &[DVector<f64>], tau_index: usize) -> (f64, f64) {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for pt in &self.pairs {
            let (sk, sl) = (&draws[pt.k], &draws[pt.l]);
            let inv = &pt.inv_scale[tau_index];
            for j in 0..self.dim {
                let v = (pt.coef_k * sk[j] - pt.coef_l * sl[j]) * inv[j];
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
        (hi, lo)
    }
}

/// Prepared bootstrap for one dataset: per-group factors plus the kernel.
#[derive(Debug, Clone)]
pub struct Bootstrap {
    factors: Vec<Factor>,
    kernel: ReplicateKernel,
}

impl Bootstrap {
    pub fn new(
        data: &Dataset,
        pairs: &PairSet,
        taus: &[f64],
        method: FactorMethod,
    ) -> Result<Self> {
        let summaries: Vec<GroupSummary> = data.groups().iter().map(group_summary).collect();
        let factors = match method {
            FactorMethod::Centered => data.groups().iter().map(centered_factor).collect(),
            FactorMethod::Eigen => summaries
                .iter()
                .map(|s| psd_factor(&s.cov))
                .collect::<Result<Vec<_>>>()?,
        };
        let kernel = ReplicateKernel::new(&summaries, pairs, taus)?;
        Ok(Self { factors, kernel })
    }

    pub fn kernel(&self) -> &ReplicateKernel {
        &self.kernel
    }

    /// One fresh `S*_k` per group.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<DVector<f64>> {
        self.factors
            .iter()
            .map(|f| f.apply(&standard_normals(f.rank(), rng)))
            .collect()
    }

    /// `(M*_b, L*_b)` for every tau, from one shared set of draws.
    pub fn replicate<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(f64, f64)> {
        let draws = self.draw(rng);
        (0..self.kernel.taus.len())
            .map(|t| self.kernel.extremes(&draws, t))
            .collect()
    }

    /// `replicates` replicates, replicate `b` drawn from stream `key / b`.
    /// Returns one distribution per tau.
    pub fn run(&self, replicates: usize, key: StreamKey) -> Vec<BootstrapDistribution> {
        let reps: Vec<Vec<(f64, f64)>> = (0..replicates)
            .into_par_iter()
            .map(|b| self.replicate(&mut key.child(b as u64).rng()))
            .collect();
        (0..self.kernel.taus.len())
            .map(|t| {
                let (m, l) = reps.iter().map(|r| r[t]).unzip();
                BootstrapDistribution::from_replicates(m, l)
            })
            .collect()
    }
}

/// One replicate `(M*_b, L*_b)` for a single tau.
pub fn boot_replicate<R: Rng + ?Sized>(
    summaries: &[GroupSummary],
    factors: &[Factor],
    pairs: &PairSet,
    tau: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let kernel = ReplicateKernel::new(summaries, pairs, &[tau])?;
    let draws: Vec<DVector<f64>> = factors
        .iter()
        .map(|f| f.apply(&standard_normals(f.rank(), rng)))
        .collect();
    Ok(kernel.extremes(&draws, 0))
}

pub fn run_bootstrap(data: &Dataset, config: &BootstrapConfig) -> Result<BootstrapDistribution> {
    config.validate()?;
    let boot = Bootstrap::new(data, &config.pairs, &[config.tau], config.factor)?;
    Ok(boot
        .run(config.replicates, StreamKey::root(config.seed))
        .pop()
        .expect("one tau"))
}

/// Bootstrap distributions for several taus from the same draws.
pub fn run_bootstrap_multi(
    data: &Dataset,
    pairs: &PairSet,
    taus: &[f64],
    replicates: usize,
    key: StreamKey,
    method: FactorMethod,
) -> Result<Vec<BootstrapDistribution>> {
    if replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    Ok(Bootstrap::new(data, pairs, taus, method)?.run(replicates, key))
}

pub fn observed_pivot(data: &Dataset, pairs: &PairSet, tau: f64) -> Result<ObservedPivot> {
    let summaries: Vec<GroupSummary> = data.groups().iter().map(group_summary).collect();
    observed_pivot_from_summaries(&summaries, pairs, tau)
}

pub fn observed_pivot_from_summaries(
    summaries: &[GroupSummary],
    pairs: &PairSet,
    tau: f64,
) -> Result<ObservedPivot> {
    check_tau(tau)?;
    let mut per_triple = Vec::new();
    let mut t_max = f64::NEG_INFINITY;
    let mut t_min = f64::INFINITY;
    for &(k, l) in pairs.pairs() {
        let ps = pooled_scale(&summaries[k], &summaries[l]);
        let root_n = ps.harmonic_n.sqrt();
        for j in 0..ps.sigma.len() {
            if tau > 0.0 && ps.sigma[j] == 0.0 {
                return Err(Error::DegenerateCoordinate { k, l, j });
            }
            let diff = summaries[k].mean[j] - summaries[l].mean[j];
            let v = root_n * diff / scale_power(ps.sigma[j], tau);
            t_max = t_max.max(v);
            t_min = t_min.min(v);
            per_triple.push((k, l, j, v));
        }
    }
    Ok(ObservedPivot {
        t_max,
        t_min,
        per_triple,
    })
}
