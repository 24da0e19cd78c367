//! Observation containers.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Accept rows within this distance of unit norm as is.
pub const UNIT_NORM_TOL: f64 = 1e-8;
/// Renormalize rows within this distance; reject anything further out.
pub const UNIT_NORM_RENORM_TOL: f64 = 1e-6;

/// An `n x d` matrix of finite observations stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl DataMatrix {
    pub fn new(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(invalid("data matrix needs at least one row and one column"));
        }
        if values.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at row {}, column {}", pos / d, pos % d)));
        }
        Ok(Self { values, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(invalid(format!("row {i} has {} columns, expected {d}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::new(values, n, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self { values, n: idx.len(), d: self.d }
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: other.d });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(Self { values, n: self.n + other.n, d: self.d })
    }

    /// Scale every row to unit Euclidean length.
    pub fn l2_normalized(&self) -> Result<Self> {
        let mut values = self.values.clone();
        for (i, r) in values.chunks_exact_mut(self.d).enumerate() {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::Degenerate(format!("row {i} has zero norm")));
            }
            r.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(Self { values, n: self.n, d: self.d })
    }

    /// Apply the unit-norm policy: rows off by at most
    /// [`UNIT_NORM_RENORM_TOL`] are rescaled, others are an error.
    pub fn ensure_unit_rows(&self) -> Result<Self> {
        let mut values = self.values.clone();
        for (i, r) in values.chunks_exact_mut(self.d).enumerate() {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let off = (norm - 1.0).abs();
            if off > UNIT_NORM_RENORM_TOL {
                return Err(Error::NotUnitNorm { row: i, norm });
            }
            if off > UNIT_NORM_TOL {
                r.iter_mut().for_each(|v| *v /= norm);
            }
        }
        Ok(Self { values, n: self.n, d: self.d })
    }
}

impl TryFrom<Vec<Vec<f64>>> for DataMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<DataMatrix> for Vec<Vec<f64>> {
    fn from(m: DataMatrix) -> Self {
        m.to_rows()
    }
}

/// Group assignment for each observation.
///
/// Arbitrary integer labels are accepted; groups are indexed `0..k` in
/// ascending label order and the original labels are kept for display.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct GroupLabels {
    labels: Vec<i64>,
    index: Vec<usize>,
    names: Vec<i64>,
}

impl GroupLabels {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("empty label vector"));
        }
        let mut names = labels.clone();
        names.sort_unstable();
        names.dedup();
        let index = labels.iter().map(|l| names.binary_search(l).expect("label present")).collect();
        Ok(Self { labels, index, names })
    }

    /// Labels from 0-based group indices.
    pub fn from_indices(index: &[usize]) -> Result<Self> {
        Self::new(index.iter().map(|&g| g as i64).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Group index in `0..k` of each observation.
    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn names(&self) -> &[i64] {
        &self.names
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k()];
        for &g in &self.index {
            s[g] += 1;
        }
        s
    }

    /// Observation indices of each group, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k()];
        for (i, &g) in self.index.iter().enumerate() {
            m[g].push(i);
        }
        m
    }

    pub fn check_paired(&self, x: &DataMatrix) -> Result<()> {
        if self.len() != x.n() {
            return Err(Error::DimensionMismatch { expected: x.n(), got: self.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<i64>> for GroupLabels {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<GroupLabels> for Vec<i64> {
    fn from(g: GroupLabels) -> Self {
        g.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(DataMatrix::new(vec![1.0, f64::NAN], 1, 2).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(DataMatrix::new(vec![], 0, 1).is_err());
    }

    #[test]
    fn labels_are_indexed_in_sorted_order() {
        let g = GroupLabels::new(vec![3, 1, 3, 2]).unwrap();
        assert_eq!(g.k(), 3);
        assert_eq!(g.index(), &[2, 0, 2, 1]);
        assert_eq!(g.sizes(), vec![1, 1, 2]);
    }

    #[test]
    fn unit_norm_policy() {
        let ok = DataMatrix::from_rows(&[vec![1.0 + 5e-7, 0.0]]).unwrap();
        let fixed = ok.ensure_unit_rows().unwrap();
        assert!((fixed.get(0, 0) - 1.0).abs() < 1e-15);
        let bad = DataMatrix::from_rows(&[vec![1.1, 0.0]]).unwrap();
        assert!(matches!(bad.ensure_unit_rows(), Err(Error::NotUnitNorm { .. })));
    }

    #[test]
    fn serde_round_trip() {
        let m = DataMatrix::from_rows(&[vec![0.1, 0.2], vec![1.0 / 3.0, -7.5]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: DataMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(m, back);
    }
}
