//! Per-group moments and pooled partial-standardization scales.

use nalgebra::{DMatrix, DVector};

/// Sample mean and covariance of one group.
///
/// The covariance uses divisor `n`, not `n - 1`:
/// `cov = n^{-1} sum_i (x_i - mean)(x_i - mean)^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub n: usize,
}

impl GroupSummary {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standard deviations `sqrt(diag(cov))`.
    pub fn std_devs(&self) -> DVector<f64> {
        self.cov.diagonal().map(|v| v.max(0.0).sqrt())
    }
}

/// Column means of `group`.
pub fn column_means(group: &DMatrix<f64>) -> DVector<f64> {
    let n = group.nrows() as f64;
    DVector::from_iterator(
        group.ncols(),
        group.column_iter().map(|c| c.iter().sum::<f64>() / n),
    )
}

/// `group` with its column means subtracted.
pub fn centered(group: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = column_means(group);
    let mut c = group.clone();
    for (j, mut col) in c.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    c
}

pub fn group_summary(group: &DMatrix<f64>) -> GroupSummary {
    let n = group.nrows();
    let mean = column_means(group);
    let xc = centered(group);
    let mut cov = xc.tr_mul(&xc) / n as f64;
    // exact symmetry
    let p = cov.nrows();
    for j in 0..p {
        for i in (j + 1)..p {
            cov[(j, i)] = cov[(i, j)];
        }
    }
    GroupSummary { mean, cov, n }
}

/// Pooled scale of the pair `(k, l)`: the square roots of the diagonal of
/// `(n_l/(n_k+n_l)) cov_k + (n_k/(n_k+n_l)) cov_l`, together with the
/// mixing weights and the harmonic sample size `n_k n_l / (n_k + n_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledScale {
    pub sigma: DVector<f64>,
    pub weight_k: f64,
    pub weight_l: f64,
    pub harmonic_n: f64,
}

pub fn pooled_scale(sk: &GroupSummary, sl: &GroupSummary) -> PooledScale {
    assert_eq!(sk.dim(), sl.dim(), "summaries differ in dimension");
    let nk = sk.n as f64;
    let nl = sl.n as f64;
    let weight_k = nl / (nk + nl);
    let weight_l = nk / (nk + nl);
    let sigma = DVector::from_fn(sk.dim(), |j, _| {
        (weight_k * sk.cov[(j, j)] + weight_l * sl.cov[(j, j)])
            .max(0.0)
            .sqrt()
    });
    PooledScale {
        sigma,
        weight_k,
        weight_l,
        harmonic_n: nk * nl / (nk + nl),
    }
}

/// Variance-decay exponent per group.
///
/// Fits `log sd_(j) = c - alpha log j` by least squares over the positive
/// standard deviations sorted in decreasing order and returns `alpha`.
/// `None` when fewer than two positive standard deviations exist.
/// Descriptive only; nothing in the test depends on it.
pub fn decay_diagnostic(summaries: &[GroupSummary]) -> Vec<Option<f64>> {
    summaries
        .iter()
        .map(|s| decay_exponent(s.std_devs().as_slice()))
        .collect()
}

pub fn decay_exponent(std_devs: &[f64]) -> Option<f64> {
    let mut sd: Vec<f64> = std_devs.iter().copied().filter(|&v| v > 0.0).collect();
    if sd.len() < 2 {
        return None;
    }
    sd.sort_by(|a, b| b.total_cmp(a));
    let xs: Vec<f64> = (1..=sd.len()).map(|j| (j as f64).ln()).collect();
    let ys: Vec<f64> = sd.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(-sxy / sxx)
}
