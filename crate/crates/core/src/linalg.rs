//! Square-root factors of covariance matrices and Gaussian draws.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// A `p x r` matrix `F` with `F F^T` equal to some covariance. Draws are
/// `F z` with `z` a vector of `r` standard normal deviates.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    matrix: DMatrix<f64>,
}

impl Factor {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of standard normal deviates consumed per draw.
    pub fn rank(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.matrix * self.matrix.transpose()
    }

    /// `F z` for a given vector of deviates.
    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.matrix * z
    }
}

/// Symmetric-eigendecomposition factor of a positive semidefinite matrix.
///
/// Negative eigenvalues (and positive ones below the round-off floor
/// `p * eps * lambda_max`) are clipped to zero and their eigenvectors
/// dropped, so the rank of the factor equals the numerical rank of `cov`.
/// Rows whose diagonal entry is exactly zero are forced to zero.
pub fn psd_factor(cov: &DMatrix<f64>) -> Result<Factor> {
    let p = cov.nrows();
    assert_eq!(p, cov.ncols(), "covariance must be square");
    let scale = cov.amax();
    if scale == 0.0 || p == 0 {
        return Ok(Factor::new(DMatrix::zeros(p, 0)));
    }
    // working on cov / max|cov| keeps the decomposition scale-free
    let eig = (cov / scale).symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -1e-6 {
        return Err(Error::NotPsd {
            min_eigenvalue: min * scale,
        });
    }
    let lmax = eig.eigenvalues.max();
    let floor = p as f64 * f64::EPSILON * lmax;
    let mut order: Vec<usize> = (0..p).filter(|&i| eig.eigenvalues[i] > floor).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let root_scale = scale.sqrt();
    let mut f = DMatrix::zeros(p, order.len());
    for (c, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        // sign convention: largest-magnitude component positive
        let lead = v.iamax();
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        let w = sign * eig.eigenvalues[i].sqrt() * root_scale;
        for r in 0..p {
            f[(r, c)] = w * v[r];
        }
    }
    for r in 0..p {
        if cov[(r, r)] == 0.0 {
            f.row_mut(r).fill(0.0);
        }
    }
    Ok(Factor::new(f))
}

/// Factor `n^{-1/2} (X - mean)^T` of the divisor-`n` sample covariance of
/// `group` (rows are observations). `F z` with standard normal `z` is the
/// Gaussian multiplier draw `n^{-1/2} sum_i z_i (x_i - mean)`.
pub fn centered_factor(group: &DMatrix<f64>) -> Factor {
    let n = group.nrows() as f64;
    let xc = crate::summary::centered(group);
    Factor::new(xc.transpose() / n.sqrt())
}

/// Standard normal vector of length `len`.
pub fn standard_normals<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// One draw from `N(0, F F^T)`.
pub fn gaussian_draw<R: Rng + ?Sized>(factor: &Factor, rng: &mut R) -> DVector<f64> {
    let z = standard_normals(factor.rank(), rng);
    factor.apply(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn identity_factor() {
        let f = psd_factor(&DMatrix::identity(3, 3)).unwrap();
        assert!(max_abs_diff(&f.reconstruct(), &DMatrix::identity(3, 3)) < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_zero_factor() {
        let f = psd_factor(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(f.rank(), 0);
        let d = gaussian_draw(&f, &mut StreamKey::root(1).rng());
        assert_eq!(d, DVector::zeros(4));
    }

    #[test]
    fn rank_one_reconstruction() {
        let v = DVector::from_vec(vec![1.0, 2.0]);
        let cov = &v * v.transpose();
        let f = psd_factor(&cov).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(max_abs_diff(&f.reconstruct(), &cov) < 1e-8);
        let mut rng = StreamKey::root(3).rng();
        for _ in 0..100 {
            let d = gaussian_draw(&f, &mut rng);
            // d is proportional to v: d_2 = 2 d_1
            assert!((d[1] - 2.0 * d[0]).abs() <= 1e-12 * d[1].abs().max(1.0));
        }
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(psd_factor(&m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn clips_tiny_negative_eigenvalues() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-9]);
        let f = psd_factor(&m).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(max_abs_diff(&f.reconstruct(), &m) <= 1e-8 * 2.0);
    }

    #[test]
    fn zero_variance_rows_stay_zero() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.5, 1.0]);
        let f = psd_factor(&m).unwrap();
        assert!(f.matrix().row(0).iter().all(|&v| v == 0.0));
        assert!(max_abs_diff(&f.reconstruct(), &m) < 1e-12);
    }

    #[test]
    fn identity_draws_have_identity_covariance() {
        let p = 4;
        let f = psd_factor(&DMatrix::identity(p, p)).unwrap();
        let mut rng = StreamKey::root(11).rng();
        let n = 100_000;
        let mut acc = DMatrix::zeros(p, p);
        for _ in 0..n {
            let d = gaussian_draw(&f, &mut rng);
            acc += &d * d.transpose();
        }
        acc /= n as f64;
        assert!(max_abs_diff(&acc, &DMatrix::identity(p, p)) < 0.05);
    }

    #[test]
    fn centered_factor_reproduces_sample_covariance() {
        let g = DMatrix::from_row_slice(4, 3, &[
            1.0, 2.0, 0.5, //
            -1.0, 0.0, 1.5, //
            0.3, 1.1, -0.7, //
            2.2, -0.4, 0.0,
        ]);
        let f = centered_factor(&g);
        let s = crate::summary::group_summary(&g);
        assert!(max_abs_diff(&f.reconstruct(), &s.cov) < 1e-14);
    }

    #[test]
    fn draws_are_positively_homogeneous() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]);
        for &c in &[0.5, 3.0, 10.0] {
            let fa = psd_factor(&a).unwrap();
            let fc = psd_factor(&(&a * (c * c))).unwrap();
            let key = StreamKey::root(9);
            let (mut r1, mut r2) = (key.rng(), key.rng());
            for _ in 0..50 {
                let x = gaussian_draw(&fa, &mut r1);
                let y = gaussian_draw(&fc, &mut r2);
                for i in 0..3 {
                    assert!((y[i] - c * x[i]).abs() <= 1e-12 * (c * x[i]).abs().max(1e-300) + 1e-300,
                        "c={c} i={i} {} vs {}", y[i], c * x[i]);
                }
            }
        }
    }
}
