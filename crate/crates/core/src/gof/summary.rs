use serde::{Deserialize, Serialize};

use super::{TestKind, TestOutcome};
use crate::data::{DataMatrix, GroupLabels};
use crate::error::{invalid, Result};
use crate::special::normal_quantile;
use crate::stats::{descriptive_stats, SummaryTable};

/// QQ points for one variable: `x` is the reference axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqSeries {
    pub variable: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub table: SummaryTable,
    pub qq: Vec<QqSeries>,
}

/// Plotting positions `(i - a) / (n + 1 - 2a)`, `a = 3/8` for `n <= 10`.
fn plotting_positions(n: usize) -> Vec<f64> {
    let a = if n <= 10 { 0.375 } else { 0.5 };
    (1..=n).map(|i| (i as f64 - a) / (n as f64 + 1.0 - 2.0 * a)).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Sample quantiles against standard normal quantiles, per variable.
pub fn normal_qq(x: &DataMatrix) -> Vec<QqSeries> {
    let theo: Vec<f64> = plotting_positions(x.n()).into_iter().map(normal_quantile).collect();
    (0..x.d()).map(|j| QqSeries { variable: j, x: theo.clone(), y: sorted(x.column(j)) }).collect()
}

/// Linear interpolation of sorted `v` at `m` evenly spaced ranks.
fn resample_sorted(v: &[f64], m: usize) -> Vec<f64> {
    if v.len() == m {
        return v.to_vec();
    }
    let step = if m > 1 { (v.len() - 1) as f64 / (m - 1) as f64 } else { 0.0 };
    (0..m)
        .map(|i| {
            let pos = i as f64 * step;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(v.len() - 1);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        })
        .collect()
}

/// Quantiles of `x` against quantiles of `y`, per variable. The longer
/// sample is interpolated down to the length of the shorter.
pub fn two_sample_qq(x: &DataMatrix, y: &DataMatrix) -> Result<Vec<QqSeries>> {
    if x.d() != y.d() {
        return Err(invalid("samples have different dimensions"));
    }
    let m = x.n().min(y.n());
    Ok((0..x.d())
        .map(|j| QqSeries {
            variable: j,
            x: resample_sorted(&sorted(x.column(j)), m),
            y: resample_sorted(&sorted(y.column(j)), m),
        })
        .collect())
}

/// Descriptive tables and QQ series matching a test outcome.
///
/// Normality: table of `x` and normal QQ. Two-sample: table by sample
/// and sample-vs-sample QQ. k-sample: table by group.
pub fn summarize(
    outcome: &TestOutcome,
    x: &DataMatrix,
    labels: Option<&GroupLabels>,
    y: Option<&DataMatrix>,
) -> Result<TestSummary> {
    match outcome.test {
        TestKind::Normality => Ok(TestSummary { table: descriptive_stats(x, None)?, qq: normal_qq(x) }),
        TestKind::TwoSample => {
            let y = y.ok_or_else(|| invalid("two-sample summary needs the second sample"))?;
            let pooled = x.vstack(y)?;
            let g = GroupLabels::new((0..pooled.n()).map(|i| if i < x.n() { 1 } else { 2 }).collect())?;
            Ok(TestSummary { table: descriptive_stats(&pooled, Some(&g))?, qq: two_sample_qq(x, y)? })
        }
        TestKind::KSample => Ok(TestSummary { table: descriptive_stats(x, labels)?, qq: Vec::new() }),
    }
}
