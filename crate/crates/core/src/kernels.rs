//! Gaussian and Poisson kernels and their centered forms.
//!
//! Per-pair functions mirror the textbook definitions and double as
//! oracles. Test statistics instead work from a materialized
//! [`KernelMatrix`], where centering reduces to row sums and block sums.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, UNIT_NORM_TOL};
use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, dot, sq_dist, GaussianDensity};

/// Gaussian bandwidth `h`, with `Σ_h = h² I`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Self(h))
        } else {
            Err(invalid(format!("bandwidth must be positive, got {h}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Bandwidth {
    type Error = Error;
    fn try_from(h: f64) -> Result<Self> {
        Self::new(h)
    }
}

impl From<Bandwidth> for f64 {
    fn from(h: Bandwidth) -> f64 {
        h.0
    }
}

/// Poisson kernel concentration `ρ ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Concentration(f64);

impl Concentration {
    pub fn new(rho: f64) -> Result<Self> {
        if rho > 0.0 && rho < 1.0 {
            Ok(Self(rho))
        } else {
            Err(invalid(format!("concentration must lie in (0, 1), got {rho}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Concentration {
    type Error = Error;
    fn try_from(rho: f64) -> Result<Self> {
        Self::new(rho)
    }
}

impl From<Concentration> for f64 {
    fn from(r: Concentration) -> f64 {
        r.0
    }
}

fn check_dims(s: &[f64], t: &[f64]) -> Result<()> {
    if s.len() != t.len() {
        return Err(Error::DimensionMismatch { expected: s.len(), got: t.len() });
    }
    Ok(())
}

fn check_unit(v: &[f64]) -> Result<()> {
    let n = dot(v, v).sqrt();
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::NotUnitNorm { row: 0, norm: n });
    }
    Ok(())
}

pub(crate) fn gaussian_norm_const(d: usize, h: f64) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0) * h.powi(-(d as i32))
}

#[inline]
pub(crate) fn gaussian_raw(s: &[f64], t: &[f64], c: f64, inv_two_h2: f64) -> f64 {
    c * (-sq_dist(s, t) * inv_two_h2).exp()
}

pub fn gaussian_kernel(s: &[f64], t: &[f64], h: Bandwidth) -> Result<f64> {
    check_dims(s, t)?;
    let h = h.get();
    Ok(gaussian_raw(s, t, gaussian_norm_const(s.len(), h), 1.0 / (2.0 * h * h)))
}

/// Gaussian kernel centered with respect to `G = N(μ_G, Σ_G)`.
#[derive(Debug, Clone)]
pub struct ParametricCentering {
    d: usize,
    norm: f64,
    inv_two_h2: f64,
    mu: Vec<f64>,
    cross: GaussianDensity,
    constant: f64,
}

impl ParametricCentering {
    pub fn new(h: Bandwidth, mu: &[f64], sigma: &DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: sigma.nrows() });
        }
        cholesky(sigma)?;
        let hh = h.get() * h.get();
        let sh = DMatrix::<f64>::identity(d, d) * hh;
        let cross = GaussianDensity::new(&(&sh + sigma))?;
        let twice = GaussianDensity::new(&(&sh + sigma * 2.0))?;
        let constant = twice.eval_diff(mu, mu);
        Ok(Self {
            d,
            norm: gaussian_norm_const(d, h.get()),
            inv_two_h2: 1.0 / (2.0 * hh),
            mu: mu.to_vec(),
            cross,
            constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `K_h(s, t)`.
    #[inline]
    pub fn raw(&self, s: &[f64], t: &[f64]) -> f64 {
        gaussian_raw(s, t, self.norm, self.inv_two_h2)
    }

    /// `K_{Σh+ΣG}(μ_G, s)`.
    #[inline]
    pub fn mean_term(&self, s: &[f64]) -> f64 {
        self.cross.eval_diff(s, &self.mu)
    }

    /// `K_{Σh+2ΣG}(μ_G, μ_G)`.
    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn eval(&self, s: &[f64], t: &[f64]) -> f64 {
        // Adding the two mean terms first keeps the result exactly symmetric.
        self.raw(s, t) - (self.mean_term(s) + self.mean_term(t)) + self.constant
    }
}

pub fn gaussian_kernel_centered_parametric(
    s: &[f64],
    t: &[f64],
    h: Bandwidth,
    mu_g: &[f64],
    sigma_g: &DMatrix<f64>,
) -> Result<f64> {
    check_dims(s, t)?;
    check_dims(s, mu_g)?;
    Ok(ParametricCentering::new(h, mu_g, sigma_g)?.eval(s, t))
}

#[inline]
pub(crate) fn poisson_raw(cos: f64, rho: f64, half_d: f64) -> f64 {
    (1.0 - rho * rho) / (1.0 + rho * rho - 2.0 * rho * cos).powf(half_d)
}

pub fn poisson_kernel(u: &[f64], v: &[f64], rho: Concentration) -> Result<f64> {
    check_dims(u, v)?;
    check_unit(u)?;
    check_unit(v)?;
    Ok(poisson_raw(dot(u, v), rho.get(), u.len() as f64 / 2.0))
}

pub fn poisson_kernel_centered(u: &[f64], v: &[f64], rho: Concentration) -> Result<f64> {
    Ok(poisson_kernel(u, v, rho)? - 1.0)
}

/// Kernel `k(x, y)` centered against the empirical distribution of `pooled`.
pub fn center_nonparametric<K: Fn(&[f64], &[f64]) -> f64>(
    k: K,
    pooled: &DataMatrix,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let n = pooled.n();
    if n < 2 {
        return Err(invalid("nonparametric centering needs a pooled sample of size at least 2"));
    }
    let nf = n as f64;
    let kx: f64 = pooled.rows().map(|z| k(x, z)).sum::<f64>() / nf;
    let ky: f64 = pooled.rows().map(|z| k(z, y)).sum::<f64>() / nf;
    let mut kk = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                kk += k(pooled.row(i), pooled.row(j));
            }
        }
    }
    Ok(k(x, y) - kx - ky + kk / (nf * (nf - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringKind {
    None,
    ParametricGaussian,
    UniformSphere,
    PooledNonparametric,
}

/// Dense `n x m` matrix of kernel values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub centering: CenteringKind,
}

impl KernelMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn is_centered(&self) -> bool {
        self.centering != CenteringKind::None
    }

    fn symmetric_from<F: Fn(usize, usize) -> f64 + Sync>(n: usize, f: F) -> Self {
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate().skip(i) {
                *v = f(i, j);
            }
        });
        for i in 0..n {
            for j in 0..i {
                values[i * n + j] = values[j * n + i];
            }
        }
        Self { values, n, m: n, centering: CenteringKind::None }
    }

    /// Uncentered Gaussian Gram matrix of `x`.
    pub fn gaussian(x: &DataMatrix, h: Bandwidth) -> Self {
        let c = gaussian_norm_const(x.d(), h.get());
        let inv = 1.0 / (2.0 * h.get() * h.get());
        Self::symmetric_from(x.n(), |i, j| gaussian_raw(x.row(i), x.row(j), c, inv))
    }

    /// Uncentered Poisson Gram matrix of unit rows `x`.
    pub fn poisson(x: &DataMatrix, rho: Concentration) -> Self {
        let half_d = x.d() as f64 / 2.0;
        Self::symmetric_from(x.n(), |i, j| poisson_raw(dot(x.row(i), x.row(j)), rho.get(), half_d))
    }

    /// Center a square Gram matrix against its own sample.
    pub fn centered_nonparametric(&self) -> Result<Self> {
        let n = self.n;
        if n != self.m || n < 2 {
            return Err(invalid("nonparametric centering needs a square matrix with n >= 2"));
        }
        let nf = n as f64;
        let rows: Vec<f64> = self.values.chunks_exact(n).map(|r| r.iter().sum::<f64>() / nf).collect();
        let total: f64 = self.values.iter().sum();
        let diag: f64 = (0..n).map(|i| self.get(i, i)).sum();
        let mc = (total - diag) / (nf * (nf - 1.0));
        let mut values = self.values.clone();
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] -= rows[i] + rows[j] - mc;
            }
        }
        Ok(Self { values, n, m: n, centering: CenteringKind::PooledNonparametric })
    }
}
