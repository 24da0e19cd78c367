//! Randomized comparison of library statistics against the brute-force
//! oracle on small instances.

#![allow(dead_code)]

use super::oracle;
use nalgebra::DMatrix;
use quadratik_core::clustering::{adjusted_rand_index, log_likelihood};
use quadratik_core::gof::{
    ksample_statistics, matrix_distance, one_sample_statistics, two_sample_statistic, OneSampleKernel,
};
use quadratik_core::kernels::{Bandwidth, Concentration, ParametricCentering};
use quadratik_core::{DataMatrix, GroupLabels, SeededRandomSource};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

pub const QUANTITIES: [&str; 9] = [
    "U/V parametric",
    "U/V nonparametric",
    "U/V Poisson",
    "D entries",
    "T_n",
    "two-sample",
    "K=2 reduction",
    "log-likelihood",
    "ARI",
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn gaussian_rows(rng: &mut ChaCha20Rng, n: usize, d: usize, shift: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * 3.0 - 1.5 + shift).collect()).collect()
}

fn sphere_rows(rng: &mut ChaCha20Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter().map(|a| a / norm).collect()
        })
        .collect()
}

fn spd(rng: &mut ChaCha20Rng, d: usize) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }).collect())
        .collect()
}

/// Maximum relative error per entry of [`QUANTITIES`] over `instances`
/// random instances with n ≤ 8 and d ≤ 3.
pub fn run(instances: usize, seed: u64) -> Vec<f64> {
    let mut worst = vec![0.0f64; QUANTITIES.len()];
    let root = SeededRandomSource::new(seed);
    for inst in 0..instances {
        let mut rng = root.derive(inst as u64).rng();
        let d = rng.random_range(1..=3usize);
        let h = 0.3 + 1.7 * rng.random::<f64>();
        let bw = Bandwidth::new(h).unwrap();
        let n = rng.random_range(2..=8usize);

        // One-sample statistics.
        let rows = gaussian_rows(&mut rng, n, d, 0.0);
        let x = DataMatrix::from_rows(&rows).unwrap();
        let mu: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
        let sigma = spd(&mut rng, d);
        let sig = DMatrix::from_fn(d, d, |i, j| sigma[i][j]);
        let pc = ParametricCentering::new(bw, &mu, &sig).unwrap();
        let (u, v) = one_sample_statistics(&x, OneSampleKernel::Parametric(&pc)).unwrap();
        let (uo, vo) = oracle::u_and_v(&rows, &|a, b| oracle::param_centered(a, b, h, &mu, &sigma));
        worst[0] = worst[0].max(rel(u, uo)).max(rel(v, vo));

        let (u, v) = one_sample_statistics(&x, OneSampleKernel::Nonparametric(bw)).unwrap();
        let k = |a: &[f64], b: &[f64]| oracle::gauss(a, b, h);
        let (uo, vo) = oracle::u_and_v(&rows, &|a, b| oracle::nonparam_centered(&k, &rows, a, b));
        worst[1] = worst[1].max(rel(u, uo)).max(rel(v, vo));

        let ds = d.max(2);
        let srows = sphere_rows(&mut rng, n, ds);
        let rho = 0.05 + 0.9 * rng.random::<f64>();
        let (u, v) = one_sample_statistics(
            &DataMatrix::from_rows(&srows).unwrap(),
            OneSampleKernel::Poisson(Concentration::new(rho).unwrap()),
        )
        .unwrap();
        let (uo, vo) = oracle::u_and_v(&srows, &|a, b| oracle::poisson(a, b, rho) - 1.0);
        worst[2] = worst[2].max(rel(u, uo)).max(rel(v, vo));

        // K-sample matrix distance.
        let kg = rng.random_range(2..=3usize);
        let groups: Vec<Vec<Vec<f64>>> = (0..kg)
            .map(|g| {
                let ni = rng.random_range(2..=8usize);
                gaussian_rows(&mut rng, ni, d, 0.4 * g as f64)
            })
            .collect();
        let pooled: Vec<Vec<f64>> = groups.iter().flatten().cloned().collect();
        let labels: Vec<i64> = groups.iter().enumerate().flat_map(|(g, s)| std::iter::repeat_n(g as i64 + 1, s.len())).collect();
        let dm = matrix_distance(&DataMatrix::from_rows(&pooled).unwrap(), &GroupLabels::new(labels).unwrap(), bw).unwrap();
        let dmo = oracle::distance_matrix(&groups, h);
        for i in 0..kg {
            for j in 0..kg {
                worst[3] = worst[3].max(rel(dm.get(i, j), dmo[i][j]));
            }
        }
        let (scaled, t) = ksample_statistics(&dm).unwrap();
        let to = oracle::t_n(&dmo);
        worst[4] = worst[4].max(rel(t, to)).max(rel(scaled, (kg as f64 - 1.0) * to));

        let (gx, gy) = (&groups[0], &groups[1]);
        let two = two_sample_statistic(&DataMatrix::from_rows(gx).unwrap(), &DataMatrix::from_rows(gy).unwrap(), bw).unwrap();
        worst[5] = worst[5].max(rel(two, oracle::two_sample(gx, gy, h)));
        let pair: Vec<Vec<f64>> = gx.iter().chain(gy).cloned().collect();
        let pair_labels: Vec<i64> = (0..pair.len()).map(|i| (i >= gx.len()) as i64).collect();
        let d2 = matrix_distance(&DataMatrix::from_rows(&pair).unwrap(), &GroupLabels::new(pair_labels).unwrap(), bw).unwrap();
        worst[6] = worst[6].max(rel(ksample_statistics(&d2).unwrap().1, two));

        // Mixture log-likelihood.
        let m = rng.random_range(1..=3usize);
        let mut alpha: Vec<f64> = (0..m).map(|_| 0.1 + rng.random::<f64>()).collect();
        let total: f64 = alpha.iter().sum();
        alpha.iter_mut().for_each(|a| *a /= total);
        let mus = sphere_rows(&mut rng, m, ds);
        let rhos: Vec<f64> = (0..m).map(|_| 0.05 + 0.9 * rng.random::<f64>()).collect();
        let ll = log_likelihood(&DataMatrix::from_rows(&srows).unwrap(), &alpha, &mus, &rhos).unwrap();
        worst[7] = worst[7].max(rel(ll, oracle::log_lik(&srows, &alpha, &mus, &rhos)));

        // ARI.
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..3usize)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..3usize)).collect();
        worst[8] = worst[8].max(rel(adjusted_rand_index(&a, &b).unwrap(), oracle::ari(&a, &b)));
    }
    worst
}
