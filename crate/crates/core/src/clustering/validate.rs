use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{adjusted_rand_index, in_group_proportion, macro_precision_recall};
use super::MixtureFit;
use crate::data::{DataMatrix, GroupLabels};
use crate::error::{invalid, Error, Result};
use crate::gof::{ksample_test, ResamplingPlan, TestOutcome};
use crate::kernels::Bandwidth;
use crate::linalg::symmetric_eigen;
use crate::rng::SeededRandomSource;
use crate::stats::{descriptive_stats, sample_mean_cov, SummaryTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub h: f64,
    pub plan: ResamplingPlan,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { h: 1.5, plan: ResamplingPlan::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KValidation {
    pub k: usize,
    pub igp: Vec<Option<f64>>,
    /// k-sample test on the fitted partition; absent for `k = 1` or when
    /// some cluster is too small to resample.
    pub test: Option<TestOutcome>,
    pub test_error: Option<String>,
    pub ari: Option<f64>,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    pub k: usize,
    pub wcss_euclidean: f64,
    pub wcss_cosine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<KValidation>,
    pub elbow: Vec<ElbowPoint>,
    /// Advisory: `k` with the largest second difference of each curve.
    pub elbow_k_euclidean: Option<usize>,
    pub elbow_k_cosine: Option<usize>,
}

/// `k` maximizing `W(k-1) - 2 W(k) + W(k+1)` over interior points whose
/// neighbours are consecutive counts.
pub fn elbow_point(series: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for w in series.windows(3) {
        let ((k0, a), (k1, b), (k2, c)) = (w[0], w[1], w[2]);
        if k1 != k0 + 1 || k2 != k1 + 1 {
            continue;
        }
        let second = a - 2.0 * b + c;
        if best.is_none_or(|(_, s)| second > s) {
            best = Some((k1, second));
        }
    }
    best.map(|(k, _)| k)
}

pub fn validate(
    fits: &BTreeMap<usize, MixtureFit>,
    x: &DataMatrix,
    truth: Option<&GroupLabels>,
    cfg: &ValidationConfig,
    source: SeededRandomSource,
) -> Result<ValidationReport> {
    if let Some(t) = truth {
        t.check_paired(x)?;
    }
    let h = Bandwidth::new(cfg.h)?;
    let mut rows = Vec::new();
    for (&k, fit) in fits {
        if fit.final_memberships.len() != x.n() {
            return Err(Error::DimensionMismatch { expected: x.n(), got: fit.final_memberships.len() });
        }
        let memb = fit.memberships0();
        let igp = in_group_proportion(x, &memb)?;
        let (test, test_error) = if k < 2 {
            (None, None)
        } else {
            let labels = GroupLabels::new(fit.final_memberships.iter().map(|&m| m as i64).collect())?;
            if labels.k() < 2 {
                (None, Some("fitted partition has a single nonempty cluster".to_string()))
            } else {
                match ksample_test(x, &labels, h, &cfg.plan, source.derive_named("validate", k as u64)) {
                    Ok(t) => (Some(t), None),
                    Err(Error::InvalidArgument(m)) => (None, Some(m)),
                    Err(e) => return Err(e),
                }
            }
        };
        let (ari, mp, mr) = match truth {
            Some(t) => {
                let (p, r) = macro_precision_recall(t.labels(), &memb)?;
                (Some(adjusted_rand_index(t.labels(), &memb)?), Some(p), Some(r))
            }
            None => (None, None, None),
        };
        rows.push(KValidation { k, igp, test, test_error, ari, macro_precision: mp, macro_recall: mr });
    }
    let elbow: Vec<ElbowPoint> = fits
        .values()
        .map(|f| ElbowPoint { k: f.k, wcss_euclidean: f.wcss_euclidean, wcss_cosine: f.wcss_cosine })
        .collect();
    let euc: Vec<(usize, f64)> = elbow.iter().map(|e| (e.k, e.wcss_euclidean)).collect();
    let cos: Vec<(usize, f64)> = elbow.iter().map(|e| (e.k, e.wcss_cosine)).collect();
    Ok(ValidationReport { rows, elbow_k_euclidean: elbow_point(&euc), elbow_k_cosine: elbow_point(&cos), elbow })
}

/// Scores of the centered data on the top `m` principal components.
pub fn principal_scores(x: &DataMatrix, m: usize) -> Result<DataMatrix> {
    if m == 0 || m > x.d() {
        return Err(invalid(format!("cannot take {m} components of {}-dimensional data", x.d())));
    }
    let (mean, cov) = sample_mean_cov(x)?;
    let (_, vecs) = symmetric_eigen(&cov);
    let mut values = Vec::with_capacity(x.n() * m);
    for row in x.rows() {
        for c in 0..m {
            values.push((0..x.d()).map(|j| (row[j] - mean[j]) * vecs[(j, c)]).sum());
        }
    }
    DataMatrix::new(values, x.n(), m)
}

/// Display coordinates: raw rows for `d <= 3`, otherwise the top three
/// principal component scores rescaled to unit length.
pub fn sphere_coordinates(x: &DataMatrix) -> Result<DataMatrix> {
    if x.d() <= 3 {
        return Ok(x.clone());
    }
    principal_scores(x, 3)?.l2_normalized()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub k: usize,
    pub table: SummaryTable,
    pub coordinates: DataMatrix,
    pub projected: bool,
    pub memberships: Vec<usize>,
    pub true_labels: Option<Vec<i64>>,
}

/// Per-cluster descriptive statistics and 3-D display coordinates.
pub fn summary_stat(fit: &MixtureFit, x: &DataMatrix, truth: Option<&GroupLabels>) -> Result<ClusterSummary> {
    if let Some(t) = truth {
        t.check_paired(x)?;
    }
    let labels = GroupLabels::new(fit.final_memberships.iter().map(|&m| m as i64).collect())?;
    labels.check_paired(x)?;
    Ok(ClusterSummary {
        k: fit.k,
        table: descriptive_stats(x, Some(&labels))?,
        coordinates: sphere_coordinates(x)?,
        projected: x.d() > 3,
        memberships: fit.final_memberships.clone(),
        true_labels: truth.map(|t| t.labels().to_vec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elbow_of_kinked_curve() {
        let s = vec![(2, 10.0), (3, 7.0), (4, 4.0), (5, 3.5), (6, 3.2)];
        assert_eq!(elbow_point(&s), Some(4));
        assert_eq!(elbow_point(&s[..2]), None);
    }

    #[test]
    fn low_dimension_passes_through() {
        let x = DataMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(sphere_coordinates(&x).unwrap(), x);
    }
}
