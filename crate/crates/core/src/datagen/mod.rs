//! Simulation models: Gaussian and non-Gaussian random processes,
//! mean-function families, multivariate Poisson counts and the named
//! scenario catalog.

pub mod kernels;
pub mod mean;
pub mod poisson;
pub mod scenario;

pub use kernels::{gp_sample, gram_matrix, matern_cov, series_process_sample, wiener_cov, CovKernel, ProcessSampler};
pub use mean::{mean_eval, MeanFamily, MeanId};
pub use poisson::{mv_poisson_sample, PoissonPattern, PoissonSpec};
pub use scenario::{scenario_build, scenario_catalog, CovSetting, Model, Scenario, ScenarioSampler};
