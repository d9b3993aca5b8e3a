//! Input datasets and the set of compared group pairs.
//!
//! Groups and pairs are indexed from 0 in the Rust API. The command-line
//! front-end converts to 1-based labels at the boundary.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `K` groups of observations; group `k` is an `n_k x p` matrix with one
/// observation per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    groups: Vec<DMatrix<f64>>,
}

impl Dataset {
    /// Builds a dataset and checks every invariant (see [`validate_dataset`]).
    pub fn new(groups: Vec<DMatrix<f64>>) -> Result<Self> {
        validate_dataset(Self { groups })
    }

    /// Wraps groups without validation. Callers must run
    /// [`validate_dataset`] before handing the result to a test.
    pub fn from_groups_unchecked(groups: Vec<DMatrix<f64>>) -> Self {
        Self { groups }
    }

    /// Builds a dataset from row-major rows per group.
    pub fn from_rows(groups: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut mats = Vec::with_capacity(groups.len());
        for (g, rows) in groups.iter().enumerate() {
            let p = rows.first().map_or(0, Vec::len);
            if let Some(bad) = rows.iter().find(|r| r.len() != p) {
                return Err(Error::DimensionMismatch {
                    group: g,
                    expected: p,
                    found: bad.len(),
                });
            }
            mats.push(DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]));
        }
        Self::new(mats)
    }

    pub fn groups(&self) -> &[DMatrix<f64>] {
        &self.groups
    }

    pub fn group(&self, k: usize) -> &DMatrix<f64> {
        &self.groups[k]
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn dim(&self) -> usize {
        self.groups.first().map_or(0, DMatrix::ncols)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(DMatrix::nrows).collect()
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            groups: self.groups.iter().map(|g| g * c).collect(),
        }
    }

    /// Reorders coordinates so that new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        Self {
            groups: self
                .groups
                .iter()
                .map(|g| DMatrix::from_fn(g.nrows(), perm.len(), |i, j| g[(i, perm[j])]))
                .collect(),
        }
    }

    pub fn into_groups(self) -> Vec<DMatrix<f64>> {
        self.groups
    }
}

/// Checks the dataset invariants: `K >= 2`, every `n_k >= 2`, a common
/// dimension `p >= 1` and finite entries. Returns the dataset unchanged.
pub fn validate_dataset(raw: Dataset) -> Result<Dataset> {
    let k = raw.groups.len();
    if k < 2 {
        return Err(Error::TooFewGroups(k));
    }
    let p = raw.groups[0].ncols();
    for (g, m) in raw.groups.iter().enumerate() {
        if m.ncols() != p {
            return Err(Error::DimensionMismatch {
                group: g,
                expected: p,
                found: m.ncols(),
            });
        }
    }
    if p == 0 {
        return Err(Error::EmptyDimension);
    }
    for (g, m) in raw.groups.iter().enumerate() {
        if m.nrows() < 2 {
            return Err(Error::TooFewObservations {
                group: g,
                n: m.nrows(),
            });
        }
        // column-major walk; report the first offender in row-major order
        if m.iter().any(|v| !v.is_finite()) {
            for i in 0..m.nrows() {
                for j in 0..p {
                    if !m[(i, j)].is_finite() {
                        return Err(Error::NonFiniteEntry {
                            group: g,
                            row: i,
                            col: j,
                        });
                    }
                }
            }
        }
    }
    Ok(raw)
}

/// Ordered pairs `(k, l)` with `k < l` whose mean differences are tested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pairs: Vec<(usize, usize)>,
}

impl PairSet {
    /// Validates pairs against `num_groups`. Pairs given as `(l, k)` with
    /// `l > k` are rejected rather than silently flipped.
    pub fn new(pairs: Vec<(usize, usize)>, num_groups: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidPairs("pair set is empty".into()));
        }
        for (i, &(k, l)) in pairs.iter().enumerate() {
            if k >= l {
                return Err(Error::InvalidPairs(format!(
                    "pair ({k}, {l}) must satisfy k < l"
                )));
            }
            if l >= num_groups {
                return Err(Error::InvalidPairs(format!(
                    "pair ({k}, {l}) refers to a group beyond {num_groups}"
                )));
            }
            if pairs[..i].contains(&(k, l)) {
                return Err(Error::InvalidPairs(format!("duplicate pair ({k}, {l})")));
            }
        }
        Ok(Self { pairs })
    }

    /// All `K(K-1)/2` pairs in lexicographic order.
    pub fn all(num_groups: usize) -> Self {
        let pairs = (0..num_groups)
            .flat_map(|k| ((k + 1)..num_groups).map(move |l| (k, l)))
            .collect();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_group(&self) -> usize {
        self.pairs.iter().map(|&(_, l)| l).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(n: usize, p: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, p, |i, j| (i * p + j) as f64)
    }

    #[test]
    fn accepts_well_formed() {
        let d = Dataset::new(vec![zeros(50, 51), zeros(50, 51), zeros(50, 51)]).unwrap();
        assert_eq!(d.num_groups(), 3);
        assert_eq!(d.dim(), 51);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let err = Dataset::new(vec![zeros(10, 5), zeros(10, 6)]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { group: 1, .. }));
    }

    #[test]
    fn rejects_nan() {
        let mut g = zeros(4, 3);
        g[(2, 1)] = f64::NAN;
        let err = Dataset::new(vec![zeros(4, 3), g]).unwrap_err();
        assert_eq!(err, Error::NonFiniteEntry { group: 1, row: 2, col: 1 });
    }

    #[test]
    fn rejects_small_inputs() {
        assert_eq!(
            Dataset::new(vec![zeros(4, 3)]).unwrap_err(),
            Error::TooFewGroups(1)
        );
        assert_eq!(
            Dataset::new(vec![zeros(4, 3), zeros(1, 3)]).unwrap_err(),
            Error::TooFewObservations { group: 1, n: 1 }
        );
        assert_eq!(
            Dataset::new(vec![zeros(4, 0), zeros(4, 0)]).unwrap_err(),
            Error::EmptyDimension
        );
    }

    #[test]
    fn validation_is_idempotent() {
        let d = Dataset::new(vec![zeros(3, 2), zeros(5, 2)]).unwrap();
        let again = validate_dataset(d.clone()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn pair_sets() {
        assert_eq!(PairSet::all(3).pairs(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(PairSet::all(4).len(), 6);
        assert!(PairSet::new(vec![(0, 1), (2, 3)], 4).is_ok());
        assert!(PairSet::new(vec![], 4).is_err());
        assert!(PairSet::new(vec![(1, 0)], 4).is_err());
        assert!(PairSet::new(vec![(0, 4)], 4).is_err());
        assert!(PairSet::new(vec![(0, 1), (0, 1)], 4).is_err());
    }
}
