//! Maps an [`Operation`] onto the library.

use std::collections::BTreeMap;
use std::sync::atomic::AtomicBool;

use quadratik_core::clustering::{
    adjusted_rand_index, elbow_point, in_group_proportion, macro_precision_recall, pkbc_fit_cancellable,
    sphere_coordinates, summary_stat, validate, ClusterConfig, ElbowPoint, MixtureFit, ValidationConfig,
};
use quadratik_core::gof::{ksample_test, normality_test, summarize, twosample_test, NormalityConfig};
use quadratik_core::kernels::{Bandwidth, Concentration};
use quadratik_core::linalg::to_dmatrix;
use quadratik_core::pkbd::{dpkb, rpkb, PkbdParams};
use quadratik_core::stats::descriptive_stats;
use quadratik_core::tuning::{select_h_cancellable, AlternativeSpec, TuningConfig};
use quadratik_core::uniformity::{pk_test, UniformityConfig};
use quadratik_core::{DataMatrix, GroupLabels, SeededRandomSource};

use crate::error::{ApiError, Result};
use crate::request::{ClusterRequest, Operation};
use crate::response::{
    ClusterMetrics, ClusteringResult, DensityResult, Envelope, Output, SampleResult, ScatterPlot, TestReport,
    UniformityReport,
};

/// Seed used when neither a flag nor `QUADRATIK_SEED` provides one.
pub const DEFAULT_SEED: u64 = 1;

/// Parsed inputs of one operation.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub x: Option<DataMatrix>,
    pub labels: Option<GroupLabels>,
    /// Second sample of the two-sample test.
    pub y: Option<DataMatrix>,
    /// Previously computed fits for `validate` and `summary`.
    pub fits: Option<Vec<MixtureFit>>,
}

fn need<'a, T>(v: &'a Option<T>, what: &str, op: &Operation) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| ApiError::invalid(format!("{} requires {what}", op.name())))
}

/// Execute `op` and wrap the result in an envelope.
pub fn run(op: &Operation, inputs: &Inputs, seed: u64, cancel: Option<&AtomicBool>) -> Result<Envelope> {
    Ok(Envelope::new(op.clone(), seed, execute(op, inputs, seed, cancel)?))
}

/// Execute `op`. `cancel` is polled by the long-running operations
/// (bandwidth selection and clustering).
pub fn execute(op: &Operation, inputs: &Inputs, seed: u64, cancel: Option<&AtomicBool>) -> Result<Output> {
    let source = SeededRandomSource::new(seed);
    match op {
        Operation::NormalTest(r) => {
            let x = need(&inputs.x, "a data table", op)?;
            let sigma = r.sigma.as_deref().map(to_dmatrix).transpose()?;
            let cfg = NormalityConfig {
                h: Bandwidth::new(r.h)?,
                mu: r.mu.clone(),
                sigma,
                centering: r.centering,
                replicates: r.replicates,
                quantile: r.quantile,
            };
            let outcome = normality_test(x, &cfg, source)?;
            let summary = summarize(&outcome, x, None, None)?;
            Ok(Output::Test(TestReport { outcome, summary }))
        }
        Operation::TwosampleTest(r) => {
            let (x, y) = two_samples(inputs, op)?;
            let outcome = twosample_test(&x, &y, Bandwidth::new(r.h)?, &r.plan, source)?;
            let summary = summarize(&outcome, &x, None, Some(&y))?;
            Ok(Output::Test(TestReport { outcome, summary }))
        }
        Operation::KsampleTest(r) => {
            let x = need(&inputs.x, "a data table", op)?;
            let labels = need(&inputs.labels, "group labels", op)?;
            let outcome = ksample_test(x, labels, Bandwidth::new(r.h)?, &r.plan, source)?;
            let summary = summarize(&outcome, x, Some(labels), None)?;
            Ok(Output::Test(TestReport { outcome, summary }))
        }
        Operation::UniformityTest(r) => {
            let x = need(&inputs.x, "a data table", op)?;
            let cfg = UniformityConfig { rho: Concentration::new(r.rho)?, replicates: r.replicates, quantile: r.quantile };
            let outcome = pk_test(x, &cfg, source)?;
            Ok(Output::Uniformity(UniformityReport { outcome, summary: descriptive_stats(x, None)? }))
        }
        Operation::SelectH(r) => {
            let x = need(&inputs.x, "a data table", op)?;
            let labels = need(&inputs.labels, "group labels", op)?;
            let mut cfg = TuningConfig::new(r.alternative);
            cfg.alternative = AlternativeSpec {
                family: r.alternative,
                deltas: r.deltas.clone().unwrap_or_else(|| r.alternative.default_deltas()),
            };
            if let Some(g) = &r.h_grid {
                cfg.h_grid = g.clone();
            }
            cfg.n_runs = r.n_runs;
            cfg.plan = r.plan;
            Ok(Output::Tuning(select_h_cancellable(x, labels, &cfg, source, cancel)?))
        }
        Operation::PkbdSample(r) => {
            let params = PkbdParams::new(r.mu.clone(), Concentration::new(r.rho)?)?;
            if r.n == 0 {
                return Err(ApiError::invalid("sample size must be positive"));
            }
            let report = rpkb(r.n, &params, r.method, &mut source.rng())?;
            Ok(Output::Sample(SampleResult {
                plot: ScatterPlot::of(&report.samples),
                samples: report.samples,
                proposals_used: report.proposals_used,
                acceptance_rate: report.acceptance_rate,
            }))
        }
        Operation::PkbdDensity(r) => {
            let x = need(&inputs.x, "a data table", op)?.ensure_unit_rows()?;
            let params = PkbdParams::new(r.mu.clone(), Concentration::new(r.rho)?)?;
            let densities = x.rows().map(|row| dpkb(row, &params)).collect::<quadratik_core::Result<_>>()?;
            Ok(Output::Density(DensityResult { densities }))
        }
        Operation::Cluster(r) => {
            let x = prepared(need(&inputs.x, "a data table", op)?, r)?;
            let fits = fit(&x, r, source, cancel)?;
            Ok(Output::Clustering(clustering_result(&x, fits, inputs.labels.as_ref(), r.normalize)?))
        }
        Operation::Validate(r) => {
            let x = prepared(need(&inputs.x, "a data table", op)?, &r.cluster)?;
            let fits = match &inputs.fits {
                Some(f) => keyed(f.clone()),
                None => fit(&x, &r.cluster, source, cancel)?,
            };
            let cfg = ValidationConfig { h: r.h, plan: r.plan };
            Ok(Output::Validation(validate(&fits, &x, inputs.labels.as_ref(), &cfg, source)?))
        }
        Operation::Summary(r) => {
            let x = prepared(need(&inputs.x, "a data table", op)?, &r.cluster)?;
            let mut fits = match &inputs.fits {
                Some(f) => keyed(f.clone()),
                None => {
                    let mut c = r.cluster.clone();
                    if c.k.is_empty() {
                        c.k = vec![r.num_clust];
                    }
                    fit(&x, &c, source, cancel)?
                }
            };
            let chosen = fits
                .remove(&r.num_clust)
                .ok_or_else(|| ApiError::invalid(format!("no fit with {} clusters", r.num_clust)))?;
            Ok(Output::Summary(summary_stat(&chosen, &x, inputs.labels.as_ref())?))
        }
    }
}

/// The second sample, or the two groups of a labelled table.
fn two_samples(inputs: &Inputs, op: &Operation) -> Result<(DataMatrix, DataMatrix)> {
    let x = need(&inputs.x, "a data table", op)?;
    if let Some(y) = &inputs.y {
        return Ok((x.clone(), y.clone()));
    }
    let labels = inputs
        .labels
        .as_ref()
        .ok_or_else(|| ApiError::invalid("twosample-test requires a second sample or two-group labels"))?;
    labels.check_paired(x)?;
    if labels.k() != 2 {
        return Err(ApiError::invalid(format!("two-sample labels must have 2 groups, found {}", labels.k())));
    }
    let members = labels.members();
    Ok((x.select_rows(&members[0]), x.select_rows(&members[1])))
}

fn prepared(x: &DataMatrix, r: &ClusterRequest) -> Result<DataMatrix> {
    Ok(if r.normalize { x.l2_normalized()? } else { x.clone() })
}

fn fit(
    x: &DataMatrix,
    r: &ClusterRequest,
    source: SeededRandomSource,
    cancel: Option<&AtomicBool>,
) -> Result<BTreeMap<usize, MixtureFit>> {
    let cfg = ClusterConfig {
        n_clust: r.k.clone(),
        max_iter: r.max_iter,
        stopping_rule: r.stopping_rule,
        num_init: r.num_init,
        loglik_tol: r.loglik_tol,
    };
    Ok(pkbc_fit_cancellable(x, &cfg, source, cancel)?)
}

fn keyed(fits: Vec<MixtureFit>) -> BTreeMap<usize, MixtureFit> {
    fits.into_iter().map(|f| (f.k, f)).collect()
}

fn clustering_result(
    x: &DataMatrix,
    fits: BTreeMap<usize, MixtureFit>,
    truth: Option<&GroupLabels>,
    normalized: bool,
) -> Result<ClusteringResult> {
    if let Some(t) = truth {
        t.check_paired(x)?;
    }
    let mut metrics = Vec::with_capacity(fits.len());
    for fit in fits.values() {
        let memb = fit.memberships0();
        let (ari, mp, mr) = match truth {
            Some(t) => {
                let (p, r) = macro_precision_recall(t.labels(), &memb)?;
                (Some(adjusted_rand_index(t.labels(), &memb)?), Some(p), Some(r))
            }
            None => (None, None, None),
        };
        metrics.push(ClusterMetrics {
            k: fit.k,
            igp: in_group_proportion(x, &memb)?,
            ari,
            macro_precision: mp,
            macro_recall: mr,
        });
    }
    let fits: Vec<MixtureFit> = fits.into_values().collect();
    let elbow: Vec<_> = fits
        .iter()
        .map(|f| ElbowPoint {
            k: f.k,
            wcss_euclidean: f.wcss_euclidean,
            wcss_cosine: f.wcss_cosine,
        })
        .collect();
    let euc: Vec<_> = elbow.iter().map(|e| (e.k, e.wcss_euclidean)).collect();
    let cos: Vec<_> = elbow.iter().map(|e| (e.k, e.wcss_cosine)).collect();
    Ok(ClusteringResult {
        normalized,
        elbow_k_euclidean: elbow_point(&euc),
        elbow_k_cosine: elbow_point(&cos),
        elbow,
        coordinates: sphere_coordinates(x)?,
        projected: x.d() > 3,
        metrics,
        fits,
    })
}
