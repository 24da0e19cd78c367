use super::statistic::{distance_from_indices, ksample_statistics, two_sample_statistic};
use super::{critical_value, decisions, CvMethod, ResamplingMethod, ResamplingPlan, TestKind, TestOutcome};
use crate::data::{DataMatrix, GroupLabels};
use crate::error::Result;
use crate::kernels::{Bandwidth, KernelMatrix};
use crate::rng::SeededRandomSource;

fn fraction_of(plan: &ResamplingPlan) -> Option<f64> {
    (plan.method == ResamplingMethod::Subsampling).then_some(plan.fraction)
}

/// k-sample test: statistics `((K-1) T_n, T_n)` against critical values
/// `((K-1) cv, cv)`, with `cv` the resampled quantile of `T_n`.
pub fn ksample_test(
    x: &DataMatrix,
    labels: &GroupLabels,
    h: Bandwidth,
    plan: &ResamplingPlan,
    source: SeededRandomSource,
) -> Result<TestOutcome> {
    plan.validate()?;
    labels.check_paired(x)?;
    let k = labels.k();
    let gram = KernelMatrix::gaussian(x, h);
    let idx: Vec<usize> = (0..x.n()).collect();
    let dm = distance_from_indices(&gram, &idx, labels.index(), k)?;
    let (scaled, tn) = ksample_statistics(&dm)?;
    let cv = critical_value(
        |rep| Ok(ksample_statistics(&distance_from_indices(&gram, &rep.indices, &rep.groups, k)?)?.1),
        labels,
        plan,
        source,
    )?;
    let km1 = (k - 1) as f64;
    let statistics = vec![scaled, tn];
    let critical_values = vec![km1 * cv.value, cv.value];
    Ok(TestOutcome {
        test: TestKind::KSample,
        reject: decisions(&statistics, &critical_values),
        statistics,
        critical_values,
        cv_method: CvMethod::from(plan.method),
        h: h.get(),
        quantile: plan.quantile,
        replicates: plan.replicates,
        fraction: fraction_of(plan),
        centering: None,
        v_statistic: None,
        distance_matrix: Some(dm),
    })
}

/// Two-sample test of `x` against `y`.
pub fn twosample_test(
    x: &DataMatrix,
    y: &DataMatrix,
    h: Bandwidth,
    plan: &ResamplingPlan,
    source: SeededRandomSource,
) -> Result<TestOutcome> {
    plan.validate()?;
    let stat = two_sample_statistic(x, y, h)?;
    let pooled = x.vstack(y)?;
    let labels = GroupLabels::from_indices(&(0..pooled.n()).map(|i| usize::from(i >= x.n())).collect::<Vec<_>>())?;
    let gram = KernelMatrix::gaussian(&pooled, h);
    let cv = critical_value(
        |rep| Ok(ksample_statistics(&distance_from_indices(&gram, &rep.indices, &rep.groups, 2)?)?.1),
        &labels,
        plan,
        source,
    )?;
    let statistics = vec![stat];
    let critical_values = vec![cv.value];
    Ok(TestOutcome {
        test: TestKind::TwoSample,
        reject: decisions(&statistics, &critical_values),
        statistics,
        critical_values,
        cv_method: CvMethod::from(plan.method),
        h: h.get(),
        quantile: plan.quantile,
        replicates: plan.replicates,
        fraction: fraction_of(plan),
        centering: None,
        v_statistic: None,
        distance_matrix: None,
    })
}
