//! Covariance kernels and random processes on a grid.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_draw, psd_factor, Factor};

/// Number of terms in the uniform-series process.
pub const SERIES_TERMS: usize = 51;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovKernel {
    /// `(variance/16) (2^{1-nu}/Gamma(nu)) x^nu K_nu(x)` with
    /// `x = sqrt(2 nu) |s - t| / range`.
    Matern { variance: f64, range: f64, smoothness: f64 },
    /// `dispersion^2 min(s, t)`.
    Wiener { dispersion: f64 },
    /// `sum_j xi_j phi_j / 20` with `xi_j ~ U[-sqrt(3)/j^2, sqrt(3)/j^2]`.
    Series51,
}

impl CovKernel {
    pub fn matern(variance: f64, range: f64, smoothness: f64) -> Self {
        Self::Matern {
            variance,
            range,
            smoothness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CovKernel::Matern {
                variance,
                range,
                smoothness,
            } => {
                if !(variance > 0.0 && range > 0.0) {
                    return Err(Error::InvalidConfig(
                        "Matern variance and range must be positive".into(),
                    ));
                }
                half_integer_order(smoothness)?;
            }
            CovKernel::Wiener { dispersion } if dispersion <= 0.0 => {
                return Err(Error::InvalidConfig("Wiener dispersion must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// `n` such that `nu = n + 1/2`.
fn half_integer_order(nu: f64) -> Result<usize> {
    let twice = 2.0 * nu;
    if !(nu > 0.0) || twice.fract() != 0.0 || (twice as i64) % 2 != 1 || nu > 50.0 {
        return Err(Error::UnsupportedSmoothness(nu));
    }
    Ok((nu - 0.5) as usize)
}

/// `2^{1-nu} / Gamma(nu) * x^nu * K_nu(x)` for `nu = n + 1/2`, `x > 0`.
///
/// Uses `K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}`, `K_{3/2} = K_{1/2} (1 + 1/x)`
/// and the recurrence `K_{v+1} = K_{v-1} + (2v/x) K_v`.
fn matern_correlation(n: usize, x: f64) -> f64 {
    use std::f64::consts::PI;
    let k_half = (PI / (2.0 * x)).sqrt() * (-x).exp();
    let bessel = if n == 0 {
        k_half
    } else {
        let (mut k_prev, mut k_cur) = (k_half, k_half * (1.0 + 1.0 / x));
        for i in 1..n {
            let v = i as f64 + 0.5;
            let next = k_prev + 2.0 * v / x * k_cur;
            k_prev = k_cur;
            k_cur = next;
        }
        k_cur
    };
    let nu = n as f64 + 0.5;
    // Gamma(n + 1/2) = sqrt(pi) prod_{i<n} (i + 1/2)
    let gamma = PI.sqrt() * (0..n).map(|i| i as f64 + 0.5).product::<f64>();
    2f64.powf(1.0 - nu) / gamma * x.powf(nu) * bessel
}

pub fn matern_cov(s: f64, t: f64, variance: f64, range: f64, smoothness: f64) -> Result<f64> {
    let n = half_integer_order(smoothness)?;
    let x = (2.0 * smoothness).sqrt() * (s - t).abs() / range;
    let base = variance / 16.0;
    if x == 0.0 {
        return Ok(base);
    }
    Ok(base * matern_correlation(n, x))
}

pub fn wiener_cov(s: f64, t: f64, dispersion: f64) -> f64 {
    dispersion * dispersion * s.min(t)
}

/// Covariance of the kernel at `(s, t)`.
pub fn kernel_cov(kernel: &CovKernel, s: f64, t: f64) -> Result<f64> {
    match *kernel {
        CovKernel::Matern {
            variance,
            range,
            smoothness,
        } => matern_cov(s, t, variance, range, smoothness),
        CovKernel::Wiener { dispersion } => Ok(wiener_cov(s, t, dispersion)),
        CovKernel::Series51 => {
            let basis = crate::fanova::BasisSpec::default();
            Ok((0..SERIES_TERMS)
                .map(|i| {
                    let j = (i + 1) as f64;
                    basis.function(i, s) * basis.function(i, t) / j.powi(4)
                })
                .sum::<f64>()
                / 400.0)
        }
    }
}

pub fn gram_matrix(grid: &[f64], kernel: &CovKernel) -> Result<DMatrix<f64>> {
    kernel.validate()?;
    let m = grid.len();
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = kernel_cov(kernel, grid[i], grid[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Draws paths of a process on a fixed grid.
#[derive(Debug, Clone)]
pub enum ProcessSampler {
    Gaussian(Factor),
    Series { grid: Vec<f64> },
}

impl ProcessSampler {
    /// Gaussian kernels are factored once here.
    pub fn new(grid: &[f64], kernel: &CovKernel) -> Result<Self> {
        match kernel {
            CovKernel::Series51 => Ok(Self::Series {
                grid: grid.to_vec(),
            }),
            k => Ok(Self::Gaussian(psd_factor(&gram_matrix(grid, k)?)?)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match self {
            Self::Gaussian(f) => gaussian_draw(f, rng),
            Self::Series { grid } => series_process_sample(grid, rng),
        }
    }
}

/// One centered Gaussian path with the kernel's covariance on `grid`.
pub fn gp_sample<R: Rng + ?Sized>(grid: &[f64], kernel: &CovKernel, rng: &mut R) -> Result<DVector<f64>> {
    Ok(ProcessSampler::new(grid, kernel)?.sample(rng))
}

/// The 51 coefficients `xi_j ~ U[-sqrt(3)/j^2, sqrt(3)/j^2]`.
pub fn series_coefficients<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    (1..=SERIES_TERMS)
        .map(|j| {
            let half_width = 3f64.sqrt() / (j * j) as f64;
            half_width * (2.0 * rng.random::<f64>() - 1.0)
        })
        .collect()
}

/// One path of `sum_{j<=51} xi_j phi_j(t) / 20` on `grid` (raw Fourier basis).
pub fn series_process_sample<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> DVector<f64> {
    let xi = series_coefficients(rng);
    let basis = crate::fanova::BasisSpec::default();
    DVector::from_iterator(
        grid.len(),
        grid.iter().map(|&t| {
            xi.iter()
                .enumerate()
                .map(|(i, c)| c * basis.function(i, t))
                .sum::<f64>()
                / 20.0
        }),
    )
}
