//! Named simulation scenarios.
//!
//! Catalog names:
//! `fda-{M1..M4}-{common|specific}-{balanced|unbalanced}` and
//! `pois-{sparse|dense}-p{25|100}-{balanced|unbalanced}`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kernels::{CovKernel, ProcessSampler};
use super::mean::{mean_eval, MeanFamily, MeanId};
use super::poisson::{mv_poisson_sample, PoissonPattern, PoissonSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::fanova::{uniform_grid, BasisSpec, Projector};
use crate::inference::TestConfig;
use crate::rng::StreamKey;

pub const BALANCED: [usize; 3] = [50, 50, 50];
pub const UNBALANCED: [usize; 3] = [30, 50, 70];
pub const GRID_POINTS: usize = 100;
pub const REFERENCE_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovSetting {
    /// Matern(2.5, 1, 1/2) in every group.
    Common,
    /// Matern, Wiener(0.1) and the uniform series process for groups 1-3.
    Specific,
}

impl CovSetting {
    pub fn kernels(self, groups: usize) -> Vec<CovKernel> {
        let matern = CovKernel::matern(2.5, 1.0, 0.5);
        match self {
            CovSetting::Common => vec![matern; groups],
            CovSetting::Specific => {
                let cycle = [matern, CovKernel::Wiener { dispersion: 0.1 }, CovKernel::Series51];
                (0..groups).map(|k| cycle[k % 3]).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// Curves `mu_k + W_k` on a uniform grid, reduced to basis coefficients.
    Functional {
        family: MeanId,
        covariance: CovSetting,
        grid_points: usize,
        basis: BasisSpec,
    },
    Poisson { pattern: PoissonPattern, dim: usize },
    /// Independent normal coordinates with standard deviations `std_devs`;
    /// the last group's coordinate `shift_coord` is moved by `theta * shift`.
    Gaussian {
        std_devs: Vec<f64>,
        shift_coord: usize,
        shift: f64,
    },
}

/// A complete simulation recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: Model,
    pub sizes: Vec<usize>,
    pub theta: f64,
    pub test: TestConfig,
    pub reps: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn dim(&self) -> usize {
        match &self.model {
            Model::Functional { basis, .. } => basis.size,
            Model::Poisson { dim, .. } => *dim,
            Model::Gaussian { std_devs, .. } => std_devs.len(),
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// Two Gaussian groups of size `n` in dimension `p` with standard
    /// deviations `1/j`, the first coordinate of group 2 shifted by
    /// `factor * sigma_max * sqrt(log n / n)` when `theta = 1`.
    pub fn gaussian_shift(n: usize, p: usize, factor: f64) -> Self {
        let std_devs: Vec<f64> = (1..=p).map(|j| 1.0 / j as f64).collect();
        let sigma_max = std_devs.iter().copied().fold(0.0, f64::max);
        let nf = n as f64;
        Self {
            name: format!("gauss-shift-p{p}-n{n}"),
            model: Model::Gaussian {
                std_devs,
                shift_coord: 0,
                shift: factor * sigma_max * (nf.ln() / nf).sqrt(),
            },
            sizes: vec![n, n],
            theta: 1.0,
            test: TestConfig::default(),
            reps: 100,
            seed: 0,
        }
    }

    pub fn sampler(&self) -> Result<ScenarioSampler> {
        ScenarioSampler::new(self)
    }
}

fn sizes_for(design: &str) -> Option<Vec<usize>> {
    match design {
        "balanced" => Some(BALANCED.to_vec()),
        "unbalanced" => Some(UNBALANCED.to_vec()),
        _ => None,
    }
}

/// All catalog names, FDA first.
pub fn scenario_catalog() -> Vec<String> {
    let mut out = Vec::new();
    for id in MeanId::ALL {
        for cov in ["common", "specific"] {
            for design in ["balanced", "unbalanced"] {
                out.push(format!("fda-{}-{cov}-{design}", id.name()));
            }
        }
    }
    for pattern in ["sparse", "dense"] {
        for p in [25, 100] {
            for design in ["balanced", "unbalanced"] {
                out.push(format!("pois-{pattern}-p{p}-{design}"));
            }
        }
    }
    out
}

/// Scenario for a catalog name, under the null (`theta = 0`), with
/// `rho = 0.05`, fixed `tau = 0.8`, `B = 1000` and 1000 replicates.
pub fn scenario_build(name: &str) -> Result<Scenario> {
    let unknown = || Error::UnknownScenario(name.to_string());
    let parts: Vec<&str> = name.split('-').collect();
    let (model, sizes) = match parts.as_slice() {
        ["fda", family, cov, design] => {
            let family = MeanId::parse(family).ok_or_else(unknown)?;
            let covariance = match *cov {
                "common" => CovSetting::Common,
                "specific" => CovSetting::Specific,
                _ => return Err(unknown()),
            };
            let model = Model::Functional {
                family,
                covariance,
                grid_points: GRID_POINTS,
                basis: BasisSpec::default(),
            };
            (model, sizes_for(design).ok_or_else(unknown)?)
        }
        ["pois", pattern, dim, design] => {
            let pattern = match *pattern {
                "sparse" => PoissonPattern::Sparse,
                "dense" => PoissonPattern::Dense,
                _ => return Err(unknown()),
            };
            let dim = match *dim {
                "p25" => 25,
                "p100" => 100,
                _ => return Err(unknown()),
            };
            (Model::Poisson { pattern, dim }, sizes_for(design).ok_or_else(unknown)?)
        }
        _ => return Err(unknown()),
    };
    Ok(Scenario {
        name: name.to_string(),
        model,
        sizes,
        theta: 0.0,
        test: TestConfig::default(),
        reps: REFERENCE_REPLICATES,
        seed: 0,
    })
}

/// Precomputed state for drawing datasets of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSampler {
    model: Model,
    sizes: Vec<usize>,
    grid: Vec<f64>,
    processes: Vec<ProcessSampler>,
    projector: Option<Projector>,
}

impl ScenarioSampler {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        let k = scenario.sizes.len();
        let (grid, processes, projector) = match &scenario.model {
            Model::Functional {
                covariance,
                grid_points,
                basis,
                ..
            } => {
                let grid = uniform_grid(*grid_points);
                let processes = covariance
                    .kernels(k)
                    .iter()
                    .map(|kern| ProcessSampler::new(&grid, kern))
                    .collect::<Result<Vec<_>>>()?;
                let projector = Projector::new(&grid, *basis)?;
                (grid, processes, Some(projector))
            }
            _ => (Vec::new(), Vec::new(), None),
        };
        Ok(Self {
            model: scenario.model.clone(),
            sizes: scenario.sizes.clone(),
            grid,
            processes,
            projector,
        })
    }

    /// Raw curves of every group (functional models only).
    pub fn curves(&self, theta: f64, key: StreamKey) -> Vec<DMatrix<f64>> {
        let Model::Functional { family, .. } = &self.model else {
            panic!("curves() needs a functional model");
        };
        self.sizes
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let fam = MeanFamily { id: *family, theta, group: k + 1 };
                let mu: Vec<f64> = self.grid.iter().map(|&t| mean_eval(&fam, t)).collect();
                let mut rng = key.child(k as u64).rng();
                let mut y = DMatrix::zeros(n, self.grid.len());
                for i in 0..n {
                    let w = self.processes[k].sample(&mut rng);
                    for (c, m) in mu.iter().enumerate() {
                        y[(i, c)] = m + w[c];
                    }
                }
                y
            })
            .collect()
    }

    /// One dataset at effect size `theta`; group `k` uses stream `key / k`.
    pub fn sample(&self, theta: f64, key: StreamKey) -> Result<Dataset> {
        let groups: Vec<DMatrix<f64>> = match &self.model {
            Model::Functional { .. } => {
                let proj = self.projector.as_ref().expect("functional projector");
                self.curves(theta, key).iter().map(|y| proj.project(y)).collect()
            }
            Model::Poisson { pattern, dim } => {
                let spec = PoissonSpec { pattern: *pattern, theta, dim: *dim };
                self.sizes
                    .iter()
                    .enumerate()
                    .map(|(k, &n)| {
                        let mut rng = key.child(k as u64).rng();
                        let mut x = DMatrix::zeros(n, *dim);
                        for i in 0..n {
                            for (j, v) in mv_poisson_sample(&spec, k + 1, &mut rng).into_iter().enumerate() {
                                x[(i, j)] = v as f64;
                            }
                        }
                        x
                    })
                    .collect()
            }
            Model::Gaussian { std_devs, shift_coord, shift } => {
                let last = self.sizes.len() - 1;
                self.sizes
                    .iter()
                    .enumerate()
                    .map(|(k, &n)| {
                        let mut rng = key.child(k as u64).rng();
                        DMatrix::from_fn(n, std_devs.len(), |_, j| {
                            let z: f64 = rng.sample(StandardNormal);
                            let mean = if k == last && j == *shift_coord { theta * shift } else { 0.0 };
                            mean + std_devs[j] * z
                        })
                    })
                    .collect()
            }
        };
        Dataset::new(groups)
    }
}
