//! Functional ANOVA by projection onto a Fourier basis.
//!
//! Curves observed on a common grid are reduced to their first `p`
//! generalized Fourier coefficients, and the vector test is run on the
//! coefficients. Coefficients are trapezoidal-rule integrals over the grid,
//! after mapping the grid's interval affinely onto `[0, 1]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::inference::{run_test, TestConfig, TestResult};

pub const DEFAULT_BASIS_SIZE: usize = 51;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    /// `1, sin(2 pi t), cos(2 pi t), sin(4 pi t), ...` with unit amplitude.
    #[default]
    FourierRaw,
    /// Same functions with the sine and cosine terms scaled by `sqrt(2)`,
    /// orthonormal in `L2[0, 1]`.
    FourierOrthonormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub size: usize,
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            family: BasisFamily::FourierRaw,
            size: DEFAULT_BASIS_SIZE,
        }
    }
}

impl BasisSpec {
    pub fn new(family: BasisFamily, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidConfig("basis size must be at least 1".into()));
        }
        Ok(Self { family, size })
    }

    /// Highest frequency `j` among the basis functions.
    pub fn max_frequency(&self) -> usize {
        self.size / 2
    }

    /// Value of basis function `index` (0-based) at `t` in `[0, 1]`.
    pub fn function(&self, index: usize, t: f64) -> f64 {
        if index == 0 {
            return 1.0;
        }
        let freq = (index + 1) / 2;
        let arg = 2.0 * PI * freq as f64 * t;
        let v = if index % 2 == 1 { arg.sin() } else { arg.cos() };
        match self.family {
            BasisFamily::FourierRaw => v,
            BasisFamily::FourierOrthonormal => std::f64::consts::SQRT_2 * v,
        }
    }
}

/// All basis functions at `t` in `[0, 1]`.
pub fn basis_eval(spec: &BasisSpec, t: f64) -> Vec<f64> {
    (0..spec.size).map(|i| spec.function(i, t)).collect()
}

/// Discretized curves of `K` groups on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSet {
    grid: Vec<f64>,
    groups: Vec<DMatrix<f64>>,
}

impl CurveSet {
    /// `groups[k]` is `n_k x m`, one curve per row, sampled on `grid`.
    pub fn new(grid: Vec<f64>, groups: Vec<DMatrix<f64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 grid points, got {}",
                grid.len()
            )));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid must be finite and strictly increasing".into()));
        }
        for (g, m) in groups.iter().enumerate() {
            if m.ncols() != grid.len() {
                return Err(Error::DimensionMismatch {
                    group: g,
                    expected: grid.len(),
                    found: m.ncols(),
                });
            }
            if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry {
                    group: g,
                    row: pos % m.nrows(),
                    col: pos / m.nrows(),
                });
            }
        }
        Ok(Self { grid, groups })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn groups(&self) -> &[DMatrix<f64>] {
        &self.groups
    }
}

/// `m` equally spaced points on `[0, 1]`, both endpoints included.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    assert!(m >= 2, "grid needs at least two points");
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

/// Trapezoidal weights for the grid mapped onto `[0, 1]`.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let (a, b) = (grid[0], grid[m - 1]);
    let u: Vec<f64> = grid.iter().map(|t| (t - a) / (b - a)).collect();
    let mut w = vec![0.0; m];
    for i in 0..m - 1 {
        let h = 0.5 * (u[i + 1] - u[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Projection operator: an `m x p` matrix `W` with coefficients `Y W`.
#[derive(Debug, Clone)]
pub struct Projector {
    spec: BasisSpec,
    weights: DMatrix<f64>,
    grid: Vec<f64>,
}

impl Projector {
    pub fn new(grid: &[f64], spec: BasisSpec) -> Result<Self> {
        let m = grid.len();
        let required = 2 * spec.max_frequency();
        if m < required {
            return Err(Error::GridTooCoarse { m, required });
        }
        if m < 2 {
            return Err(Error::InvalidGrid("need at least 2 grid points".into()));
        }
        let w = trapezoid_weights(grid);
        let (a, b) = (grid[0], grid[m - 1]);
        let weights = DMatrix::from_fn(m, spec.size, |i, j| {
            w[i] * spec.function(j, (grid[i] - a) / (b - a))
        });
        Ok(Self {
            spec,
            weights,
            grid: grid.to_vec(),
        })
    }

    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    /// Coefficients of the curves in the rows of `curves` (`n x m` to `n x p`).
    pub fn project(&self, curves: &DMatrix<f64>) -> DMatrix<f64> {
        curves * &self.weights
    }

    /// `sum_j u_j phi_j` evaluated at the projector's grid points.
    pub fn synthesize(&self, coefs: &[f64]) -> Vec<f64> {
        let m = self.grid.len();
        let (a, b) = (self.grid[0], self.grid[m - 1]);
        self.grid
            .iter()
            .map(|t| {
                let u = (t - a) / (b - a);
                coefs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * self.spec.function(j, u))
                    .sum()
            })
            .collect()
    }
}

/// Coefficient vectors of every curve, as a dataset for [`run_test`].
pub fn project_curves(curves: &CurveSet, spec: &BasisSpec) -> Result<Dataset> {
    let proj = Projector::new(&curves.grid, *spec)?;
    Dataset::new(curves.groups.iter().map(|g| proj.project(g)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanovaResult {
    pub basis: BasisSpec,
    #[serde(flatten)]
    pub test: TestResult,
}

pub fn fanova_test(curves: &CurveSet, spec: &BasisSpec, config: &TestConfig) -> Result<FanovaResult> {
    let coefs = project_curves(curves, spec)?;
    Ok(FanovaResult {
        basis: *spec,
        test: run_test(&coefs, config)?,
    })
}
