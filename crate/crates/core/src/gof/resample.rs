use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ResamplingMethod, ResamplingPlan};
use crate::data::GroupLabels;
use crate::error::{invalid, Result};
use crate::rng::SeededRandomSource;
use crate::stats::quantile;

/// A resample: pooled indices (repeats allowed) and the group of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replicate {
    pub indices: Vec<usize>,
    pub groups: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub value: f64,
    pub replicates: Vec<f64>,
}

/// `ceil(b * n)`, robust to representation error in `b * n`.
pub fn subsample_size(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize
}

fn blocks(sizes: &[usize]) -> Vec<usize> {
    sizes.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect()
}

/// Draw one replicate from groups given by `members` (pooled indices per
/// group, `n` in total). Every scheme yields a sample drawn under the
/// hypothesis that all groups share one distribution.
pub fn draw_replicate<R: Rng + ?Sized>(
    members: &[Vec<usize>],
    n: usize,
    method: ResamplingMethod,
    fraction: f64,
    rng: &mut R,
) -> Result<Replicate> {
    match method {
        ResamplingMethod::Subsampling => {
            let sizes: Vec<usize> = members.iter().map(|m| subsample_size(fraction, m.len())).collect();
            if let Some(g) = sizes.iter().position(|&s| s < 2) {
                return Err(invalid(format!("subsample of group {g} has fewer than 2 observations")));
            }
            let mut indices = Vec::with_capacity(sizes.iter().sum());
            for (m, &s) in members.iter().zip(&sizes) {
                indices.extend(index::sample(rng, m.len(), s).into_iter().map(|i| m[i]));
            }
            // Re-partition the pooled subsample so labels are exchangeable.
            indices.shuffle(rng);
            Ok(Replicate { indices, groups: blocks(&sizes) })
        }
        ResamplingMethod::Bootstrap => {
            let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
            let total = sizes.iter().sum();
            let indices = (0..total).map(|_| rng.random_range(0..n)).collect();
            Ok(Replicate { indices, groups: blocks(&sizes) })
        }
        ResamplingMethod::Permutation => {
            let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
            let mut indices: Vec<usize> = members.iter().flatten().copied().collect();
            indices.shuffle(rng);
            Ok(Replicate { indices, groups: blocks(&sizes) })
        }
    }
}

/// Evaluate `f` on `b` replicates in parallel; replicate `i` draws from
/// the child stream `source.derive(i)`.
pub fn parallel_replicates<F>(b: usize, source: SeededRandomSource, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha20Rng) -> Result<f64> + Sync,
{
    (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = source.derive(i as u64).rng();
            f(&mut rng)
        })
        .collect()
}

/// Empirical `plan.quantile` of `statistic` over `plan.replicates`
/// resamples of the grouped sample described by `labels`.
pub fn critical_value<F>(
    statistic: F,
    labels: &GroupLabels,
    plan: &ResamplingPlan,
    source: SeededRandomSource,
) -> Result<CriticalValue>
where
    F: Fn(&Replicate) -> Result<f64> + Sync,
{
    plan.validate()?;
    let members = labels.members();
    let n = labels.len();
    let replicates = parallel_replicates(plan.replicates, source, |rng| {
        let rep = draw_replicate(&members, n, plan.method, plan.fraction, rng)?;
        statistic(&rep)
    })?;
    Ok(CriticalValue { value: quantile(&replicates, plan.quantile), replicates })
}
