//! Mixtures of Poisson kernel-based densities on the sphere.
//!
//! Fitting is EM with a minorize-maximize M-step: the mean direction is
//! the normalized weighted resultant and the concentration is the root of
//! a concave score equation on `(0, 1)`. Every `(k, init)` pair runs on
//! its own derived stream, so fitting `k = 4` alone gives the same result
//! as fitting `k = 2..10`.

mod metrics;
mod validate;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{invalid, Error, Result};
use crate::linalg::norm;
use crate::pkbd::{kernel_denominator, log_dpkb_gap};
use crate::rng::SeededRandomSource;
use crate::roots::{find_root_bracketed, DEFAULT_TOL};

pub use metrics::{adjusted_rand_index, in_group_proportion, macro_precision_recall, max_weight_matching, wcss};
pub use validate::{
    elbow_point, principal_scores, sphere_coordinates, summary_stat, validate, ClusterSummary, ElbowPoint, KValidation,
    ValidationConfig, ValidationReport,
};

pub const RHO_MIN: f64 = 1e-6;
pub const RHO_MAX: f64 = 1.0 - 1e-6;
const EMPTY_MASS: f64 = 1e-10;
const MAX_RESEEDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Run exactly `max_iter` iterations.
    Max,
    /// Stop when hard memberships no longer change.
    Membership,
    /// Stop when the log-likelihood changes by less than `loglik_tol`.
    Loglik,
}

impl std::str::FromStr for StoppingRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(Self::Max),
            "membership" => Ok(Self::Membership),
            "loglik" => Ok(Self::Loglik),
            other => Err(invalid(format!("unknown stopping rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub n_clust: Vec<usize>,
    pub max_iter: usize,
    pub stopping_rule: StoppingRule,
    pub num_init: usize,
    pub loglik_tol: f64,
}

impl ClusterConfig {
    pub fn new(n_clust: Vec<usize>) -> Self {
        Self { n_clust, max_iter: 300, stopping_rule: StoppingRule::Loglik, num_init: 10, loglik_tol: 1e-7 }
    }
}

/// One EM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub init: usize,
    /// Final log-likelihood, absent if the run failed.
    pub log_lik: Option<f64>,
    /// Number of M-steps performed.
    pub iterations: usize,
    pub reseeds: usize,
    /// Log-likelihood after every E-step.
    pub trail: Vec<f64>,
    /// Trail positions where a component was re-seeded; ascent is only
    /// guaranteed between consecutive restarts.
    pub restarts: Vec<usize>,
    pub error: Option<String>,
}

impl RunInfo {
    /// Largest decrease between consecutive trail entries, ignoring restarts.
    pub fn max_decrease(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..self.trail.len() {
            if !self.restarts.contains(&i) {
                worst = worst.max(self.trail[i - 1] - self.trail[i]);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub k: usize,
    pub alpha: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    pub post_probs: Vec<Vec<f64>>,
    pub log_lik: f64,
    pub wcss_euclidean: f64,
    pub wcss_cosine: f64,
    /// Cluster of each observation, `1..=k`.
    pub final_memberships: Vec<usize>,
    /// Trail of the selected run.
    pub log_lik_trail: Vec<f64>,
    pub best_init: usize,
    pub run_info: Vec<RunInfo>,
}

impl MixtureFit {
    /// Memberships as 0-based indices.
    pub fn memberships0(&self) -> Vec<usize> {
        self.final_memberships.iter().map(|m| m - 1).collect()
    }
}

/// Mixture log-likelihood, accumulated with log-sum-exp per observation.
pub fn log_likelihood(x: &DataMatrix, alpha: &[f64], mu: &[Vec<f64>], rho: &[f64]) -> Result<f64> {
    let k = alpha.len();
    if mu.len() != k || rho.len() != k {
        return Err(invalid("mixture parameter lengths differ"));
    }
    let mut logs = vec![0.0; k];
    let mut total = 0.0;
    for row in x.rows() {
        for j in 0..k {
            logs[j] = alpha[j].ln() + log_dpkb_gap(gap(row, &mu[j]), rho[j], x.d());
        }
        total += log_sum_exp(&logs);
    }
    Ok(total)
}

/// `1 - x·μ` for unit vectors, as half the squared distance so that it
/// keeps its relative accuracy when x is close to μ.
fn gap(x: &[f64], mu: &[f64]) -> f64 {
    0.5 * x.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

struct State {
    alpha: Vec<f64>,
    mu: Vec<Vec<f64>>,
    rho: Vec<f64>,
}

/// Posteriors (row-major `n x k`) and log-likelihood at `s`.
fn e_step(x: &DataMatrix, s: &State, post: &mut [f64]) -> f64 {
    let k = s.alpha.len();
    let d = x.d();
    let log_alpha: Vec<f64> = s.alpha.iter().map(|a| a.ln()).collect();
    let mut ll = 0.0;
    for (i, row) in x.rows().enumerate() {
        let p = &mut post[i * k..(i + 1) * k];
        for j in 0..k {
            p[j] = log_alpha[j] + log_dpkb_gap(gap(row, &s.mu[j]), s.rho[j], d);
        }
        let lse = log_sum_exp(p);
        ll += lse;
        let mut sum = 0.0;
        for v in p.iter_mut() {
            *v = (*v - lse).exp();
            sum += *v;
        }
        p.iter_mut().for_each(|v| *v /= sum);
    }
    ll
}

fn hard_memberships(post: &[f64], k: usize) -> Vec<usize> {
    post.chunks_exact(k)
        .map(|p| p.iter().enumerate().fold(0, |best, (j, &v)| if v > p[best] { j } else { best }))
        .collect()
}

/// Concentration update: root of the concave score on `(0, 1)`.
fn update_rho(n: f64, alpha: f64, d: f64, resultant: f64, weight: f64) -> f64 {
    if resultant <= 0.0 {
        return RHO_MIN;
    }
    let g = |y: f64| -2.0 * n * y * alpha / (1.0 - y * y) + d * resultant - d * y * weight;
    match find_root_bracketed(g, 0.0, 1.0 - 1e-12, DEFAULT_TOL) {
        Ok(r) => r.clamp(RHO_MIN, RHO_MAX),
        // g(1 - 1e-12) > 0: the score is still increasing at the boundary.
        Err(_) => RHO_MAX,
    }
}

struct RunOutcome {
    state: State,
    post: Vec<f64>,
    log_lik: f64,
    info: RunInfo,
}

fn em_run(x: &DataMatrix, k: usize, cfg: &ClusterConfig, init: usize, source: SeededRandomSource) -> RunOutcome {
    let (n, d) = (x.n(), x.d());
    let mut rng = source.rng();
    let centers = index::sample(&mut rng, n, k).into_vec();
    let mut s = State {
        alpha: vec![1.0 / k as f64; k],
        mu: centers.iter().map(|&i| x.row(i).to_vec()).collect(),
        rho: vec![0.5; k],
    };
    let mut info = RunInfo { init, log_lik: None, iterations: 0, reseeds: 0, trail: Vec::new(), restarts: Vec::new(), error: None };
    let mut post = vec![0.0; n * k];
    let mut prev_memb: Option<Vec<usize>> = None;
    let mut resultant = vec![0.0; d];
    loop {
        let ll = e_step(x, &s, &mut post);
        info.trail.push(ll);
        let memb = hard_memberships(&post, k);
        let converged = match cfg.stopping_rule {
            StoppingRule::Loglik => {
                let t = &info.trail;
                t.len() >= 2 && !info.restarts.contains(&(t.len() - 1)) && (t[t.len() - 1] - t[t.len() - 2]).abs() < cfg.loglik_tol
            }
            StoppingRule::Membership => prev_memb.as_ref() == Some(&memb),
            StoppingRule::Max => false,
        };
        if converged || info.iterations >= cfg.max_iter {
            info.log_lik = Some(ll);
            return RunOutcome { state: s, post, log_lik: ll, info };
        }
        prev_memb = Some(memb);

        let mass: Vec<f64> = (0..k).map(|j| (0..n).map(|i| post[i * k + j]).sum()).collect();
        if let Some(j) = mass.iter().position(|&m| m < EMPTY_MASS) {
            if info.reseeds >= MAX_RESEEDS {
                info.error = Some(format!("component {j} emptied after {MAX_RESEEDS} re-seeds"));
                return RunOutcome { state: s, post, log_lik: f64::NEG_INFINITY, info };
            }
            info.reseeds += 1;
            s.mu[j] = x.row(rng.random_range(0..n)).to_vec();
            s.rho[j] = 0.5;
            s.alpha = vec![1.0 / k as f64; k];
            info.restarts.push(info.trail.len());
            prev_memb = None;
            continue;
        }

        info.iterations += 1;
        let nf = n as f64;
        for j in 0..k {
            let alpha = mass[j] / nf;
            let (mj, rj) = (&s.mu[j], s.rho[j]);
            resultant.iter_mut().for_each(|v| *v = 0.0);
            let mut weight = 0.0;
            for (i, row) in x.rows().enumerate() {
                let w = post[i * k + j] / kernel_denominator(gap(row, mj), rj);
                weight += w;
                resultant.iter_mut().zip(row).for_each(|(r, v)| *r += w * v);
            }
            let rn = norm(&resultant);
            let rho = update_rho(nf, alpha, d as f64, rn, weight);
            if rn > 0.0 {
                s.mu[j] = resultant.iter().map(|v| v / rn).collect();
            }
            s.rho[j] = rho;
            s.alpha[j] = alpha;
        }
    }
}

fn fit_one_k(x: &DataMatrix, k: usize, cfg: &ClusterConfig, source: SeededRandomSource, cancel: Option<&AtomicBool>) -> Result<MixtureFit> {
    let runs: Vec<RunOutcome> = (0..cfg.num_init)
        .into_par_iter()
        .map(|init| {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return Err(Error::Cancelled);
            }
            Ok(em_run(x, k, cfg, init, source.derive_named("pkbc", k as u64).derive(init as u64)))
        })
        .collect::<Result<_>>()?;
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.info.error.is_none())
        .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
            Some((_, b)) if b >= r.log_lik => acc,
            _ => Some((i, r.log_lik)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NonConvergence(format!("every initialization failed for k = {k}")))?;
    let run_info: Vec<RunInfo> = runs.iter().map(|r| r.info.clone()).collect();
    let r = runs.into_iter().nth(best).expect("index in range");
    let memb = hard_memberships(&r.post, k);
    let (wcss_euclidean, wcss_cosine) = wcss(x, &memb, &r.state.mu)?;
    Ok(MixtureFit {
        k,
        alpha: r.state.alpha,
        mu: r.state.mu,
        rho: r.state.rho,
        post_probs: r.post.chunks_exact(k).map(<[f64]>::to_vec).collect(),
        log_lik: r.log_lik,
        wcss_euclidean,
        wcss_cosine,
        final_memberships: memb.iter().map(|m| m + 1).collect(),
        log_lik_trail: r.info.trail.clone(),
        best_init: best,
        run_info,
    })
}

/// Fit a mixture for every `k` in `cfg.n_clust`, keeping the best of
/// `cfg.num_init` runs for each.
pub fn pkbc_fit(x: &DataMatrix, cfg: &ClusterConfig, source: SeededRandomSource) -> Result<BTreeMap<usize, MixtureFit>> {
    pkbc_fit_cancellable(x, cfg, source, None)
}

/// As [`pkbc_fit`], polling `cancel` before each run.
pub fn pkbc_fit_cancellable(
    x: &DataMatrix,
    cfg: &ClusterConfig,
    source: SeededRandomSource,
    cancel: Option<&AtomicBool>,
) -> Result<BTreeMap<usize, MixtureFit>> {
    let x = x.ensure_unit_rows()?;
    if cfg.n_clust.is_empty() || cfg.n_clust.contains(&0) {
        return Err(invalid("cluster counts must be positive"));
    }
    if cfg.num_init < 1 {
        return Err(invalid("at least one initialization is required"));
    }
    if x.d() < 2 {
        return Err(invalid("spherical data needs dimension at least 2"));
    }
    let kmax = *cfg.n_clust.iter().max().expect("nonempty");
    if x.n() < kmax {
        return Err(invalid(format!("{} observations cannot form {kmax} clusters", x.n())));
    }
    let mut out = BTreeMap::new();
    for &k in &cfg.n_clust {
        out.insert(k, fit_one_k(&x, k, cfg, source, cancel)?);
    }
    Ok(out)
}
