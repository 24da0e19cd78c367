mod common;

use common::{equivalence, oracle};
use nalgebra::DMatrix;
use proptest::prelude::*;
use quadratik_core::gof::{
    ksample_statistics, ksample_test, matrix_distance, normal_qq, one_sample_statistics, two_sample_qq,
    two_sample_statistic, twosample_test, OneSampleKernel, ResamplingMethod, ResamplingPlan,
};
use quadratik_core::kernels::{Bandwidth, ParametricCentering};
use quadratik_core::{DataMatrix, GroupLabels, SeededRandomSource};

fn bw(h: f64) -> Bandwidth {
    Bandwidth::new(h).unwrap()
}

#[test]
fn randomized_instances_match_oracle() {
    let worst = equivalence::run(200, 2024);
    for (name, err) in equivalence::QUANTITIES.iter().zip(&worst) {
        assert!(*err <= 1e-12, "{name}: {err:e}");
    }
}

#[test]
fn parametric_toy_instance() {
    let rows = vec![vec![0.1, -0.3], vec![1.2, 0.4], vec![-0.7, 0.9]];
    let x = DataMatrix::from_rows(&rows).unwrap();
    let pc = ParametricCentering::new(bw(0.8), &[0.0, 0.0], &DMatrix::identity(2, 2)).unwrap();
    let (u, v) = one_sample_statistics(&x, OneSampleKernel::Parametric(&pc)).unwrap();
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let (uo, vo) = oracle::u_and_v(&rows, &|a, b| oracle::param_centered(a, b, 0.8, &[0.0, 0.0], &id));
    assert!((u - uo).abs() < 1e-13 && (v - vo).abs() < 1e-13);
}

#[test]
fn tiny_two_sample_instance() {
    let x = vec![vec![0.0, 0.1], vec![0.5, -0.2], vec![1.0, 1.0]];
    let y = vec![vec![0.3, 0.3], vec![-1.0, 0.2], vec![0.8, -0.6]];
    let s = two_sample_statistic(&DataMatrix::from_rows(&x).unwrap(), &DataMatrix::from_rows(&y).unwrap(), bw(1.0)).unwrap();
    assert!((s - oracle::two_sample(&x, &y, 1.0)).abs() < 1e-13);
}

#[test]
fn identical_data_gives_zero() {
    let x = DataMatrix::from_rows(&vec![vec![0.4, -1.0]; 9]).unwrap();
    let g = GroupLabels::new(vec![1, 1, 1, 2, 2, 2, 3, 3, 3]).unwrap();
    let dm = matrix_distance(&x, &g, bw(1.0)).unwrap();
    assert!(dm.values.iter().flatten().all(|v| v.abs() < 1e-15));
    let (scaled, t) = ksample_statistics(&dm).unwrap();
    assert!(scaled.abs() < 1e-15 && t.abs() < 1e-15);
    let (u, v) = one_sample_statistics(&x, OneSampleKernel::Nonparametric(bw(0.5))).unwrap();
    assert!(u.abs() < 1e-15 && v.abs() < 1e-15);

    let out = ksample_test(&x, &g, bw(1.0), &ResamplingPlan::default(), SeededRandomSource::new(1)).unwrap();
    assert!(out.critical_values.iter().all(|c| c.abs() < 1e-15));
}

#[test]
fn permutation_keeps_group_sizes() {
    let mut rng = SeededRandomSource::new(3).rng();
    let members = vec![vec![0, 1, 2], vec![3, 4, 5, 6, 7]];
    let rep = quadratik_core::gof::draw_replicate(&members, 8, ResamplingMethod::Permutation, 1.0, &mut rng).unwrap();
    let mut idx = rep.indices.clone();
    idx.sort();
    assert_eq!(idx, (0..8).collect::<Vec<_>>());
    assert_eq!(rep.groups.iter().filter(|&&g| g == 0).count(), 3);
}

#[test]
fn twosample_matches_ksample_path() {
    let root = SeededRandomSource::new(8);
    let mut rng = root.rng();
    use rand_distr::{Distribution, StandardNormal};
    let draw = |n: usize, s: f64, rng: &mut rand_chacha::ChaCha20Rng| {
        let v: Vec<f64> = (0..n * 2).map(|_| StandardNormal.sample(rng)).map(|z: f64| z + s).collect();
        DataMatrix::new(v, n, 2).unwrap()
    };
    let x = draw(30, 0.0, &mut rng);
    let y = draw(25, 0.3, &mut rng);
    let plan = ResamplingPlan { method: ResamplingMethod::Permutation, replicates: 60, ..Default::default() };
    let two = twosample_test(&x, &y, bw(1.0), &plan, root.derive(1)).unwrap();
    let labels = GroupLabels::new((0..55).map(|i| (i >= 30) as i64).collect()).unwrap();
    let k = ksample_test(&x.vstack(&y).unwrap(), &labels, bw(1.0), &plan, root.derive(1)).unwrap();
    assert!((two.statistics[0] - k.statistics[1]).abs() < 1e-12);
    assert!((two.critical_values[0] - k.critical_values[1]).abs() < 1e-12);
    assert_eq!(two.reject[0], k.reject[1]);
}

#[test]
fn qq_series_trivial_cases() {
    let x = DataMatrix::from_rows(&[vec![3.0], vec![1.0], vec![2.0]]).unwrap();
    let qq = two_sample_qq(&x, &x).unwrap();
    assert_eq!(qq[0].x, qq[0].y);
    assert_eq!(normal_qq(&x)[0].y, vec![1.0, 2.0, 3.0]);
}

fn groups_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<i64>)> {
    (2usize..4).prop_flat_map(|k| {
        prop::collection::vec((prop::collection::vec(-2.0f64..2.0, 2), 0..k as i64), 3 * k..13).prop_filter_map(
            "each group needs two members",
            move |pts| {
                let labels: Vec<i64> = pts.iter().map(|p| p.1).collect();
                (0..k as i64).all(|g| labels.iter().filter(|&&l| l == g).count() >= 2).then(|| {
                    (pts.iter().map(|p| p.0.clone()).collect(), labels)
                })
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exchangeability((rows, labels) in groups_strategy(), seed in any::<u64>()) {
        let x = DataMatrix::from_rows(&rows).unwrap();
        let g = GroupLabels::new(labels.clone()).unwrap();
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut SeededRandomSource::new(seed).rng());
        let xp = x.select_rows(&perm);
        let gp = GroupLabels::new(perm.iter().map(|&i| labels[i]).collect()).unwrap();
        let a = ksample_statistics(&matrix_distance(&x, &g, bw(1.0)).unwrap()).unwrap();
        let b = ksample_statistics(&matrix_distance(&xp, &gp, bw(1.0)).unwrap()).unwrap();
        prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        let (u, v) = one_sample_statistics(&x, OneSampleKernel::Nonparametric(bw(0.7))).unwrap();
        let (up, vp) = one_sample_statistics(&xp, OneSampleKernel::Nonparametric(bw(0.7))).unwrap();
        prop_assert!((u - up).abs() < 1e-12 && (v - vp).abs() < 1e-12);
    }

    #[test]
    fn distance_matrix_symmetric_and_pair_consistent((rows, labels) in groups_strategy()) {
        let dm = matrix_distance(&DataMatrix::from_rows(&rows).unwrap(), &GroupLabels::new(labels).unwrap(), bw(0.9)).unwrap();
        for i in 0..dm.k() {
            for j in 0..dm.k() {
                prop_assert_eq!(dm.get(i, j), dm.get(j, i));
            }
        }
        let (scaled, t) = ksample_statistics(&dm).unwrap();
        prop_assert_eq!(scaled, (dm.k() - 1) as f64 * t);
    }

    #[test]
    fn statistic_invariant_to_shift((rows, labels) in groups_strategy(), s in -3.0f64..3.0) {
        // An additive constant in the kernel cancels in T_n; so does a
        // common translation of all points.
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + s).collect()).collect();
        let g = GroupLabels::new(labels).unwrap();
        let a = ksample_statistics(&matrix_distance(&DataMatrix::from_rows(&rows).unwrap(), &g, bw(1.1)).unwrap()).unwrap();
        let b = ksample_statistics(&matrix_distance(&DataMatrix::from_rows(&shifted).unwrap(), &g, bw(1.1)).unwrap()).unwrap();
        prop_assert!((a.1 - b.1).abs() < 1e-12);
    }
}
