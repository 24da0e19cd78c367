//! Bandwidth selection by simulated power against skew-normal
//! alternatives.
//!
//! The pooled sample is summarized by location, covariance and slant
//! estimates. Null groups are drawn from the fitted skew-normal while the
//! last group comes from a perturbed alternative of magnitude `δ`. For
//! each `δ` (ascending) and `h` (ascending) the k-sample test is repeated
//! and its rejection rate recorded; the search stops at the first `δ`
//! where some `h` reaches power 0.5.

use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, GroupLabels};
use crate::error::{invalid, Error, Result};
use crate::gof::{ksample_test, ResamplingPlan};
use crate::kernels::Bandwidth;
use crate::linalg::{cholesky, symmetric_eigen};
use crate::rng::SeededRandomSource;
use crate::stats::{column_skewness, sample_mean_cov};

/// Multivariate skew-normal `SN(ξ, Ω, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewNormalParams {
    pub xi: Vec<f64>,
    pub omega: DMatrix<f64>,
    pub lambda: Vec<f64>,
}

/// Draws via the additive representation `ξ + ω̄ (δ |Z0| + W)` with
/// `W ~ N(0, Ω̄ - δδᵀ)`, where `Ω̄` is the correlation matrix of `Ω`.
pub fn sample_skew_normal<R: Rng + ?Sized>(n: usize, p: &SkewNormalParams, rng: &mut R) -> Result<DataMatrix> {
    let d = p.xi.len();
    if p.omega.nrows() != d || p.lambda.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p.omega.nrows().max(p.lambda.len()) });
    }
    cholesky(&p.omega)?;
    let scale: Vec<f64> = (0..d).map(|i| p.omega[(i, i)].sqrt()).collect();
    let corr = DMatrix::from_fn(d, d, |i, j| p.omega[(i, j)] / (scale[i] * scale[j]));
    let alpha = DVector::from_column_slice(&p.lambda);
    let ca = &corr * &alpha;
    let delta = &ca / (1.0 + alpha.dot(&ca)).sqrt();
    let psi = &corr - &delta * delta.transpose();
    // Ψ is PSD but close to singular for large slant; factor via eigen.
    let (vals, vecs) = symmetric_eigen(&psi);
    let root = DMatrix::from_fn(d, d, |i, j| vecs[(i, j)] * vals[j].max(0.0).sqrt());
    let mut values = Vec::with_capacity(n * d);
    let mut z = vec![0.0f64; d];
    for _ in 0..n {
        let z0: f64 = rng.sample::<f64, _>(StandardNormal).abs();
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for i in 0..d {
            let mut w = 0.0;
            for j in 0..d {
                w += root[(i, j)] * z[j];
            }
            values.push(p.xi[i] + scale[i] * (delta[i] * z0 + w));
        }
    }
    DataMatrix::new(values, n, d)
}

/// Largest skewness attainable by a univariate skew-normal.
pub fn max_skewness() -> f64 {
    let pi = std::f64::consts::PI;
    2f64.sqrt() * (4.0 - pi) / (pi - 2.0).powf(1.5)
}

/// Slant of a univariate skew-normal with skewness `gamma`
/// (clamped to `0.995 * max_skewness()`).
pub fn slant_from_skewness(gamma: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let g = gamma.abs().min(0.995 * max_skewness());
    if g == 0.0 {
        return 0.0;
    }
    let g23 = g.powf(2.0 / 3.0);
    let delta = (pi / 2.0 * g23 / (g23 + ((4.0 - pi) / 2.0).powf(2.0 / 3.0))).sqrt();
    gamma.signum() * delta / (1.0 - delta * delta).sqrt()
}

/// Mean, covariance and componentwise moment-matched slant.
pub fn estimate_moments(x: &DataMatrix) -> Result<SkewNormalParams> {
    if x.n() < x.d() + 1 || x.n() < 3 {
        return Err(invalid("moment estimation needs at least d + 1 (and 3) observations"));
    }
    let (xi, omega) = sample_mean_cov(x)?;
    cholesky(&omega).map_err(|_| Error::Degenerate("sample covariance is singular".into()))?;
    let lambda = column_skewness(x)?.into_iter().map(slant_from_skewness).collect();
    Ok(SkewNormalParams { xi, omega, lambda })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternativeFamily {
    Location,
    Scale,
    Skewness,
}

impl AlternativeFamily {
    pub fn default_deltas(self) -> Vec<f64> {
        match self {
            Self::Location => vec![0.2, 0.3, 0.4],
            Self::Scale => vec![0.1, 0.3, 0.5],
            Self::Skewness => vec![0.2, 0.3, 0.6],
        }
    }

    fn perturb(self, null: &SkewNormalParams, delta: f64) -> SkewNormalParams {
        let mut p = null.clone();
        match self {
            Self::Location => p.xi.iter_mut().for_each(|v| *v += delta),
            Self::Scale => p.omega *= delta,
            Self::Skewness => p.lambda.iter_mut().for_each(|v| *v += delta),
        }
        p
    }
}

impl std::str::FromStr for AlternativeFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "location" => Ok(Self::Location),
            "scale" => Ok(Self::Scale),
            "skewness" => Ok(Self::Skewness),
            other => Err(invalid(format!("unknown alternative {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSpec {
    pub family: AlternativeFamily,
    pub deltas: Vec<f64>,
}

impl AlternativeSpec {
    pub fn new(family: AlternativeFamily) -> Self {
        Self { family, deltas: family.default_deltas() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    pub alternative: AlternativeSpec,
    pub h_grid: Vec<f64>,
    /// Monte Carlo runs per `(δ, h)` cell.
    pub n_runs: usize,
    pub plan: ResamplingPlan,
}

impl TuningConfig {
    pub fn new(family: AlternativeFamily) -> Self {
        Self {
            alternative: AlternativeSpec::new(family),
            h_grid: vec![0.6, 1.0, 1.4, 1.8, 2.2],
            n_runs: 50,
            plan: ResamplingPlan::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub h: f64,
    pub delta: f64,
    pub power: f64,
    pub rejections: usize,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub rows: Vec<PowerPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub h_star: f64,
    /// `δ` at which `h_star` was chosen.
    pub delta: f64,
    pub power: f64,
    /// Whether some cell reached power 0.5.
    pub mid_power_reached: bool,
    pub curve: PowerCurve,
}

fn sorted_grid(v: &[f64], what: &str, allow_zero: bool) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(invalid(format!("{what} must be nonempty")));
    }
    if v.iter().any(|x| !(x.is_finite() && (*x > 0.0 || allow_zero && *x == 0.0))) {
        let sign = if allow_zero { "nonnegative" } else { "positive" };
        return Err(invalid(format!("{what} must be {sign}")));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    Ok(s)
}

/// Power of the k-sample test at one `(δ, h)` cell. Run `r` uses
/// the stream keyed by `(δ index, h index, r)`.
#[allow(clippy::too_many_arguments)]
fn cell_power(
    null: &SkewNormalParams,
    alt: &SkewNormalParams,
    sizes: &[usize],
    labels: &GroupLabels,
    h: Bandwidth,
    cfg: &TuningConfig,
    source: SeededRandomSource,
    cancel: Option<&AtomicBool>,
) -> Result<usize> {
    let k = sizes.len();
    let mut rejections = 0;
    for r in 0..cfg.n_runs {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(Error::Cancelled);
        }
        let run = source.derive(r as u64);
        let mut rng = run.derive_named("data", 0).rng();
        let mut values = Vec::new();
        for (g, &n) in sizes.iter().enumerate() {
            let p = if g + 1 == k { alt } else { null };
            values.extend_from_slice(sample_skew_normal(n, p, &mut rng)?.as_slice());
        }
        let x = DataMatrix::new(values, labels.len(), null.xi.len())?;
        let out = ksample_test(&x, labels, h, &cfg.plan, run.derive_named("critical", 0))?;
        if out.reject[1] {
            rejections += 1;
        }
    }
    Ok(rejections)
}

/// Select `h` from `cfg.h_grid` for the grouped sample `(x, labels)`.
pub fn select_h(x: &DataMatrix, labels: &GroupLabels, cfg: &TuningConfig, source: SeededRandomSource) -> Result<TuningResult> {
    select_h_cancellable(x, labels, cfg, source, None)
}

/// As [`select_h`], polling `cancel` between Monte Carlo runs.
pub fn select_h_cancellable(
    x: &DataMatrix,
    labels: &GroupLabels,
    cfg: &TuningConfig,
    source: SeededRandomSource,
    cancel: Option<&AtomicBool>,
) -> Result<TuningResult> {
    labels.check_paired(x)?;
    if labels.k() < 2 {
        return Err(invalid("bandwidth selection needs at least two groups"));
    }
    if cfg.n_runs < 1 {
        return Err(invalid("at least one Monte Carlo run per cell is required"));
    }
    cfg.plan.validate()?;
    let grid = sorted_grid(&cfg.h_grid, "h grid", false)?;
    // δ = 0 reproduces the null, except for scale where the null is δ = 1.
    let family = cfg.alternative.family;
    let deltas = sorted_grid(&cfg.alternative.deltas, "deltas", family != AlternativeFamily::Scale)?;
    let null = estimate_moments(x)?;
    let sizes = labels.sizes();
    let sim_labels = GroupLabels::from_indices(&sizes.iter().enumerate().flat_map(|(g, &s)| vec![g; s]).collect::<Vec<_>>())?;

    let mut rows = Vec::new();
    let mut best: Option<PowerPoint> = None;
    for (di, &delta) in deltas.iter().enumerate() {
        let alt = cfg.alternative.family.perturb(&null, delta);
        let mut winner: Option<PowerPoint> = None;
        for (hi, &h) in grid.iter().enumerate() {
            let cell = source.derive_named("cell", di as u64).derive(hi as u64);
            let rej = cell_power(&null, &alt, &sizes, &sim_labels, Bandwidth::new(h)?, cfg, cell, cancel)?;
            let pt = PowerPoint { h, delta, power: rej as f64 / cfg.n_runs as f64, rejections: rej, runs: cfg.n_runs };
            rows.push(pt);
            if winner.is_none() && pt.power >= 0.5 {
                winner = Some(pt);
            }
            if best.is_none_or(|b| pt.power > b.power) {
                best = Some(pt);
            }
        }
        if let Some(w) = winner {
            return Ok(TuningResult { h_star: w.h, delta: w.delta, power: w.power, mid_power_reached: true, curve: PowerCurve { rows } });
        }
    }
    let b = best.expect("grid and deltas are nonempty");
    Ok(TuningResult { h_star: b.h, delta: b.delta, power: b.power, mid_power_reached: false, curve: PowerCurve { rows } })
}
