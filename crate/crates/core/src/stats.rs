//! Descriptive statistics, empirical quantiles and moment estimates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, GroupLabels};
use crate::error::{invalid, Error, Result};

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Type 7 quantile of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
}

impl VariableSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            sd,
            median: quantile_sorted(&v, 0.5),
            iqr: quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25),
            min: v[0],
            max: v[v.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    /// Group label, `None` for the pooled sample.
    pub group: Option<i64>,
    pub n: usize,
    pub variables: Vec<VariableSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub overall: GroupSummary,
    pub groups: Vec<GroupSummary>,
}

fn summarize_rows(x: &DataMatrix, rows: &[usize], group: Option<i64>) -> GroupSummary {
    let variables = (0..x.d())
        .map(|j| VariableSummary::of(&rows.iter().map(|&i| x.get(i, j)).collect::<Vec<_>>()))
        .collect();
    GroupSummary { group, n: rows.len(), variables }
}

pub fn descriptive_stats(x: &DataMatrix, labels: Option<&GroupLabels>) -> Result<SummaryTable> {
    let all: Vec<usize> = (0..x.n()).collect();
    let overall = summarize_rows(x, &all, None);
    let groups = match labels {
        None => Vec::new(),
        Some(g) => {
            g.check_paired(x)?;
            g.members()
                .iter()
                .zip(g.names())
                .map(|(rows, &name)| summarize_rows(x, rows, Some(name)))
                .collect()
        }
    };
    Ok(SummaryTable { overall, groups })
}

/// Mean vector and unbiased covariance, accumulated in one pass with
/// Welford updates.
pub fn sample_mean_cov(x: &DataMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if x.n() < 2 {
        return Err(Error::Degenerate("covariance needs at least two rows".into()));
    }
    let d = x.d();
    let mut mean = vec![0.0; d];
    let mut m2 = DMatrix::<f64>::zeros(d, d);
    let mut delta = vec![0.0; d];
    for (k, r) in x.rows().enumerate() {
        let w = 1.0 / (k + 1) as f64;
        for j in 0..d {
            delta[j] = r[j] - mean[j];
            mean[j] += delta[j] * w;
        }
        for a in 0..d {
            let da = delta[a] * (1.0 - w);
            for b in 0..=a {
                m2[(a, b)] += da * delta[b];
            }
        }
    }
    let scale = 1.0 / (x.n() - 1) as f64;
    for a in 0..d {
        for b in 0..=a {
            let v = m2[(a, b)] * scale;
            m2[(a, b)] = v;
            m2[(b, a)] = v;
        }
    }
    Ok((mean, m2))
}

/// Per-column sample skewness `m3 / m2^{3/2}` with population moments.
pub fn column_skewness(x: &DataMatrix) -> Result<Vec<f64>> {
    if x.n() < 3 {
        return Err(invalid("skewness needs at least three rows"));
    }
    let n = x.n() as f64;
    Ok((0..x.d())
        .map(|j| {
            let col = x.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let (mut m2, mut m3) = (0.0, 0.0);
            for v in &col {
                let c = v - mean;
                m2 += c * c;
                m3 += c * c * c;
            }
            m2 /= n;
            m3 /= n;
            if m2 == 0.0 {
                0.0
            } else {
                m3 / m2.powf(1.5)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column() {
        let s = VariableSummary::of(&[3.0; 5]);
        assert_eq!((s.mean, s.sd, s.iqr, s.min, s.max, s.median), (3.0, 0.0, 0.0, 3.0, 3.0, 3.0));
    }

    #[test]
    fn one_to_four() {
        let s = VariableSummary::of(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.iqr, 3.25 - 1.75);
    }

    #[test]
    fn two_point_covariance() {
        let x = DataMatrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let (m, c) = sample_mean_cov(&x).unwrap();
        assert_eq!(m, vec![1.0, 0.0]);
        assert_eq!(c.as_slice(), &[2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn identical_rows_zero_covariance() {
        let x = DataMatrix::from_rows(&vec![vec![1.5, -2.0]; 4]).unwrap();
        let (_, c) = sample_mean_cov(&x).unwrap();
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_row_is_degenerate() {
        let x = DataMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(sample_mean_cov(&x).is_err());
    }
}
