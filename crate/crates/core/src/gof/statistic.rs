use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, GroupLabels};
use crate::error::{invalid, Error, Result};
use crate::kernels::{Bandwidth, Concentration, KernelMatrix, ParametricCentering};
use crate::linalg::dot;

/// `K x K` matrix of within- and between-sample centered U-statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// Distance matrix of a (re)sample given as indices into the pooled Gram
/// matrix `gram`, with `groups[a] ∈ 0..k` the group of position `a`.
///
/// The kernel is centered against the resample itself, so only raw row
/// sums and block sums are needed: one pass over the upper triangle.
pub fn distance_from_indices(gram: &KernelMatrix, idx: &[usize], groups: &[usize], k: usize) -> Result<DistanceMatrix> {
    if idx.len() != groups.len() {
        return Err(Error::DimensionMismatch { expected: idx.len(), got: groups.len() });
    }
    let mut sizes = vec![0usize; k];
    for &g in groups {
        if g >= k {
            return Err(invalid(format!("group index {g} out of range for {k} groups")));
        }
        sizes[g] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s < 2) {
        return Err(invalid(format!("group {g} has fewer than 2 observations")));
    }
    let m = idx.len();
    let n = gram.m;
    let mut r = vec![0.0; m];
    let mut block = vec![0.0; k * k];
    let mut diag = 0.0;
    for a in 0..m {
        let ia = idx[a];
        let row = &gram.values[ia * n..(ia + 1) * n];
        let ga = groups[a] * k;
        diag += row[ia];
        let mut ra = row[ia];
        for b in a + 1..m {
            let v = row[idx[b]];
            ra += v;
            r[b] += v;
            block[ga + groups[b]] += v;
        }
        r[a] += ra;
    }
    let mf = m as f64;
    let total: f64 = r.iter().sum();
    let mc = (total - diag) / (mf * (mf - 1.0));
    let mut sa = vec![0.0; k];
    for (a, &g) in groups.iter().enumerate() {
        sa[g] += r[a] / mf;
    }
    let mut values = vec![vec![0.0; k]; k];
    for g in 0..k {
        let ng = sizes[g] as f64;
        let within = 2.0 * block[g * k + g];
        values[g][g] = (within - 2.0 * (ng - 1.0) * sa[g] + ng * (ng - 1.0) * mc) / (ng * (ng - 1.0));
        for h in g + 1..k {
            let nh = sizes[h] as f64;
            let cross = block[g * k + h] + block[h * k + g];
            let v = (cross - nh * sa[g] - ng * sa[h] + ng * nh * mc) / (ng * nh);
            values[g][h] = v;
            values[h][g] = v;
        }
    }
    Ok(DistanceMatrix { values })
}

pub fn matrix_distance(x: &DataMatrix, labels: &GroupLabels, h: Bandwidth) -> Result<DistanceMatrix> {
    labels.check_paired(x)?;
    let gram = KernelMatrix::gaussian(x, h);
    let idx: Vec<usize> = (0..x.n()).collect();
    distance_from_indices(&gram, &idx, labels.index(), labels.k())
}

/// `((K-1) T_n, T_n)` with `T_n = trace(D) - 2/(K-1) Σ_{i<j} D_ij`.
pub fn ksample_statistics(d: &DistanceMatrix) -> Result<(f64, f64)> {
    let k = d.k();
    if k < 2 {
        return Err(invalid("k-sample statistic needs at least two groups"));
    }
    let trace: f64 = (0..k).map(|i| d.get(i, i)).sum();
    let mut off = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            off += d.get(i, j);
        }
    }
    let km1 = (k - 1) as f64;
    let t = trace - 2.0 / km1 * off;
    Ok((km1 * t, t))
}

/// Two-sample statistic: within-x + within-y - 2 cross, computed from the
/// explicitly centered pooled Gram matrix.
pub fn two_sample_statistic(x: &DataMatrix, y: &DataMatrix, h: Bandwidth) -> Result<f64> {
    let (n1, n2) = (x.n(), y.n());
    if n1 < 2 || n2 < 2 {
        return Err(invalid("each sample needs at least 2 observations"));
    }
    let pooled = x.vstack(y)?;
    let c = KernelMatrix::gaussian(&pooled, h).centered_nonparametric()?;
    let (mut wx, mut wy, mut cross) = (0.0, 0.0, 0.0);
    for i in 0..n1 + n2 {
        for j in 0..n1 + n2 {
            let v = c.get(i, j);
            match (i < n1, j < n1) {
                (true, true) if i != j => wx += v,
                (false, false) if i != j => wy += v,
                (true, false) => cross += v,
                _ => {}
            }
        }
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    Ok(wx / (f1 * (f1 - 1.0)) + wy / (f2 * (f2 - 1.0)) - 2.0 * cross / (f1 * f2))
}

/// Kernel choices for one-sample statistics.
#[derive(Debug, Clone, Copy)]
pub enum OneSampleKernel<'a> {
    /// Gaussian kernel centered at a normal reference distribution.
    Parametric(&'a ParametricCentering),
    /// Gaussian kernel centered against the sample itself.
    Nonparametric(Bandwidth),
    /// Poisson kernel centered at the uniform distribution on the sphere.
    Poisson(Concentration),
}

/// `(U_n, V_n)`: off-diagonal average and full double-sum average of the
/// centered kernel.
pub fn one_sample_statistics(x: &DataMatrix, kernel: OneSampleKernel<'_>) -> Result<(f64, f64)> {
    let n = x.n();
    if n < 2 {
        return Err(invalid("one-sample statistics need at least 2 observations"));
    }
    let nf = n as f64;
    let pairs = nf * (nf - 1.0);
    match kernel {
        OneSampleKernel::Parametric(pc) => {
            if pc.dim() != x.d() {
                return Err(Error::DimensionMismatch { expected: pc.dim(), got: x.d() });
            }
            let (mut off, mut diag, mut g) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let xi = x.row(i);
                g += pc.mean_term(xi);
                diag += pc.raw(xi, xi);
                for j in i + 1..n {
                    off += pc.raw(xi, x.row(j));
                }
            }
            let off = 2.0 * off;
            let c = pc.constant_term();
            let u = (off - 2.0 * (nf - 1.0) * g + pairs * c) / pairs;
            let v = (off + diag - 2.0 * nf * g + nf * nf * c) / (nf * nf);
            Ok((u, v))
        }
        OneSampleKernel::Nonparametric(h) => {
            let gram = KernelMatrix::gaussian(x, h);
            let total: f64 = gram.values.iter().sum();
            let diag: f64 = (0..n).map(|i| gram.get(i, i)).sum();
            let mc = (total - diag) / pairs;
            let v = mc - total / (nf * nf);
            Ok((2.0 * v, v))
        }
        OneSampleKernel::Poisson(rho) => {
            let (rho, half_d) = (rho.get(), x.d() as f64 / 2.0);
            let (mut off, mut diag) = (0.0, 0.0);
            for i in 0..n {
                let xi = x.row(i);
                diag += crate::kernels::poisson_raw(dot(xi, xi), rho, half_d) - 1.0;
                for j in i + 1..n {
                    off += crate::kernels::poisson_raw(dot(xi, x.row(j)), rho, half_d) - 1.0;
                }
            }
            let off = 2.0 * off;
            Ok((off / pairs, (off + diag) / (nf * nf)))
        }
    }
}
