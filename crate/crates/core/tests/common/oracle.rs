//! Brute-force reference implementations written directly from the
//! defining sums, with no shortcuts shared with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

pub type Rows = Vec<Vec<f64>>;

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn gauss(s: &[f64], t: &[f64], h: f64) -> f64 {
    let d = s.len() as f64;
    (2.0 * PI).powf(-d / 2.0) * h.powf(-d) * (-sq(s, t) / (2.0 * h * h)).exp()
}

/// Multivariate normal density of `x - m` with covariance `c`, via
/// Gaussian elimination with partial pivoting.
pub fn mvn_density(x: &[f64], m: &[f64], c: &[Vec<f64>]) -> f64 {
    let d = x.len();
    let mut a: Vec<Vec<f64>> = c.to_vec();
    let mut rhs: Vec<f64> = x.iter().zip(m).map(|(p, q)| p - q).collect();
    let diff = rhs.clone();
    let mut det = 1.0;
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if piv != col {
            a.swap(piv, col);
            rhs.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..d {
            let f = a[r][col] / a[col][col];
            for k in col..d {
                a[r][k] -= f * a[col][k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut sol = vec![0.0; d];
    for r in (0..d).rev() {
        let s: f64 = (r + 1..d).map(|k| a[r][k] * sol[k]).sum();
        sol[r] = (rhs[r] - s) / a[r][r];
    }
    let quad = dotp(&diff, &sol);
    (2.0 * PI).powf(-(d as f64) / 2.0) * det.powf(-0.5) * (-quad / 2.0).exp()
}

fn add_h2(sigma: &[Vec<f64>], h: f64, scale: f64) -> Rows {
    let mut out: Rows = sigma.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += h * h;
    }
    out
}

pub fn param_centered(s: &[f64], t: &[f64], h: f64, mu: &[f64], sigma: &[Vec<f64>]) -> f64 {
    let cross = add_h2(sigma, h, 1.0);
    let twice = add_h2(sigma, h, 2.0);
    gauss(s, t, h) - mvn_density(mu, t, &cross) - mvn_density(s, mu, &cross) + mvn_density(mu, mu, &twice)
}

pub fn nonparam_centered(k: &dyn Fn(&[f64], &[f64]) -> f64, pooled: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    let n = pooled.len() as f64;
    let mut a = 0.0;
    let mut b = 0.0;
    for z in pooled {
        a += k(x, z);
        b += k(z, y);
    }
    let mut c = 0.0;
    for (i, zi) in pooled.iter().enumerate() {
        for (j, zj) in pooled.iter().enumerate() {
            if i != j {
                c += k(zi, zj);
            }
        }
    }
    k(x, y) - a / n - b / n + c / (n * (n - 1.0))
}

/// `(U, V)`: off-diagonal and full averages of a centered kernel.
pub fn u_and_v(x: &[Vec<f64>], kc: &dyn Fn(&[f64], &[f64]) -> f64) -> (f64, f64) {
    let n = x.len() as f64;
    let (mut off, mut all) = (0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            let v = kc(xi, xj);
            all += v;
            if i != j {
                off += v;
            }
        }
    }
    (off / (n * (n - 1.0)), all / (n * n))
}

pub fn poisson(u: &[f64], v: &[f64], rho: f64) -> f64 {
    let d = u.len() as f64;
    (1.0 - rho * rho) / (1.0 + rho * rho - 2.0 * rho * dotp(u, v)).powf(d / 2.0)
}

/// Matrix distance with the Gaussian kernel centered against the pooled
/// sample, from the defining quadruple loop.
pub fn distance_matrix(groups: &[Rows], h: f64) -> Rows {
    let pooled: Rows = groups.iter().flatten().cloned().collect();
    let k = |a: &[f64], b: &[f64]| gauss(a, b, h);
    let kc = |a: &[f64], b: &[f64]| nonparam_centered(&k, &pooled, a, b);
    let g = groups.len();
    let mut d = vec![vec![0.0; g]; g];
    for i in 0..g {
        for j in 0..g {
            let (ni, nj) = (groups[i].len() as f64, groups[j].len() as f64);
            let mut s = 0.0;
            for (a, xa) in groups[i].iter().enumerate() {
                for (b, xb) in groups[j].iter().enumerate() {
                    if i != j || a != b {
                        s += kc(xa, xb);
                    }
                }
            }
            d[i][j] = if i == j { s / (ni * (ni - 1.0)) } else { s / (ni * nj) };
        }
    }
    d
}

pub fn t_n(d: &[Vec<f64>]) -> f64 {
    let k = d.len();
    let mut trace = 0.0;
    let mut off = 0.0;
    for i in 0..k {
        trace += d[i][i];
        for j in i + 1..k {
            off += d[i][j];
        }
    }
    trace - 2.0 / (k as f64 - 1.0) * off
}

pub fn two_sample(x: &[Vec<f64>], y: &[Vec<f64>], h: f64) -> f64 {
    let pooled: Rows = x.iter().chain(y).cloned().collect();
    let k = |a: &[f64], b: &[f64]| gauss(a, b, h);
    let kc = |a: &[f64], b: &[f64]| nonparam_centered(&k, &pooled, a, b);
    let within = |s: &[Vec<f64>]| {
        let n = s.len() as f64;
        let mut t = 0.0;
        for (i, a) in s.iter().enumerate() {
            for (j, b) in s.iter().enumerate() {
                if i != j {
                    t += kc(a, b);
                }
            }
        }
        t / (n * (n - 1.0))
    };
    let mut cross = 0.0;
    for a in x {
        for b in y {
            cross += kc(a, b);
        }
    }
    within(x) + within(y) - 2.0 * cross / (x.len() * y.len()) as f64
}

fn ln_gamma_half_integer(d: usize) -> f64 {
    // Γ(d/2) by the recurrences from Γ(1) = 1 and Γ(1/2) = √π.
    let mut g: f64 = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut a = if d % 2 == 0 { 1.0 } else { 0.5 };
    while a < d as f64 / 2.0 - 1e-9 {
        g *= a;
        a += 1.0;
    }
    g.ln()
}

pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / ln_gamma_half_integer(d).exp()
}

pub fn pkbd_density(x: &[f64], mu: &[f64], rho: f64) -> f64 {
    poisson(x, mu, rho) / sphere_area(x.len())
}

pub fn log_lik(x: &[Vec<f64>], alpha: &[f64], mu: &[Vec<f64>], rho: &[f64]) -> f64 {
    x.iter()
        .map(|xi| (0..alpha.len()).map(|j| alpha[j] * pkbd_density(xi, &mu[j], rho[j])).sum::<f64>().ln())
        .sum()
}

/// Adjusted Rand index by enumerating every pair of observations.
pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            in_a += sa as u8 as f64;
            in_b += sb as u8 as f64;
            both += (sa && sb) as u8 as f64;
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = in_a * in_b / pairs;
    let denom = (in_a + in_b) / 2.0 - expected;
    if denom == 0.0 {
        let same = (0..n).all(|i| (0..n).all(|j| (a[i] == a[j]) == (b[i] == b[j])));
        return if same { 1.0 } else { 0.0 };
    }
    (both - expected) / denom
}

/// Macro precision/recall for every maximum-agreement assignment of
/// clusters to classes (ties can make several assignments optimal).
/// Labels must be contiguous from 0.
pub fn macro_pr_candidates(truth: &[usize], pred: &[usize]) -> Vec<(f64, f64)> {
    let kt = truth.iter().max().unwrap() + 1;
    let kp = pred.iter().max().unwrap() + 1;
    let mut conf = vec![vec![0usize; kt]; kp];
    for (&t, &p) in truth.iter().zip(pred) {
        conf[p][t] += 1;
    }
    let class_size: Vec<f64> = (0..kt).map(|c| truth.iter().filter(|&&t| t == c).count() as f64).collect();
    let cluster_size: Vec<f64> = (0..kp).map(|c| pred.iter().filter(|&&p| p == c).count() as f64).collect();
    let mut all: Vec<(usize, Vec<Option<usize>>)> = Vec::new();
    enumerate(0, &mut vec![false; kt], &mut vec![None; kp], &conf, &mut all);
    let best = all.iter().map(|(t, _)| *t).max().unwrap();
    all.into_iter()
        .filter(|(t, _)| *t == best)
        .map(|(_, assign)| {
            let mut precision = 0.0;
            let mut recall = 0.0;
            for (p, t) in assign.iter().enumerate() {
                if let Some(t) = *t {
                    precision += conf[p][t] as f64 / cluster_size[p];
                    recall += conf[p][t] as f64 / class_size[t];
                }
            }
            (precision / kp as f64, recall / kt as f64)
        })
        .collect()
}

fn enumerate(
    c: usize,
    used: &mut Vec<bool>,
    assign: &mut Vec<Option<usize>>,
    conf: &[Vec<usize>],
    out: &mut Vec<(usize, Vec<Option<usize>>)>,
) {
    if c == assign.len() {
        let total = assign.iter().enumerate().filter_map(|(p, t)| t.map(|t| conf[p][t])).sum();
        // Only maximal matchings: every class or every cluster is used.
        let classes_used = used.iter().filter(|u| **u).count();
        if classes_used == used.len().min(assign.len()) {
            out.push((total, assign.clone()));
        }
        return;
    }
    assign[c] = None;
    enumerate(c + 1, used, assign, conf, out);
    for t in 0..used.len() {
        if !used[t] {
            used[t] = true;
            assign[c] = Some(t);
            enumerate(c + 1, used, assign, conf, out);
            used[t] = false;
        }
    }
    assign[c] = None;
}
