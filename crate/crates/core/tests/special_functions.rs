use proptest::prelude::*;
use quadratik_core::roots::find_root_bracketed;
use quadratik_core::special::{chi_square_cdf, chi_square_quantile, normal_quantile};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

#[test]
fn quantile_inverts_cdf_on_grid() {
    for &k in &[1.0, 2.5, 10.0, 67.68] {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = chi_square_quantile(p, k).unwrap();
            assert!((chi_square_cdf(q, k) - p).abs() < 1e-9, "k={k} p={p}");
        }
    }
}

#[test]
fn quantile_matches_statrs() {
    for &k in &[0.5, 1.0, 2.5, 10.0, 67.677, 300.0] {
        let oracle = ChiSquared::new(k).unwrap();
        for &p in &[0.001, 0.05, 0.5, 0.95, 0.999] {
            let q = chi_square_quantile(p, k).unwrap();
            let cdf = oracle.cdf(q);
            assert!((cdf - p).abs() < 1e-10 * p.max(1e-2) * 100.0, "k={k} p={p} cdf={cdf}");
            let reference = oracle.inverse_cdf(p);
            assert!((q - reference).abs() <= 1e-7 * reference.max(1.0), "k={k} p={p} q={q} ref={reference}");
        }
    }
}

#[test]
fn listing_cutoff_quantile() {
    // c * q = 23.22949 with c = 0.26433 puts q near 87.88.
    let q = chi_square_quantile(0.95, 67.677).unwrap();
    assert!((q - 87.88).abs() < 0.05, "{q}");
}

#[test]
fn normal_quantile_matches_statrs() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for i in 1..1000 {
        let p = i as f64 / 1000.0;
        assert!((normal_quantile(p) - n.inverse_cdf(p)).abs() < 1e-9, "p={p}");
    }
    for &p in &[1e-10, 1e-6, 1.0 - 1e-6] {
        let z = normal_quantile(p);
        assert!((n.cdf(z) - p).abs() < 1e-6 * p.min(1.0 - p) + 1e-16, "p={p}");
    }
}

proptest! {
    #[test]
    fn cdf_of_quantile(p in 0.001f64..0.999, k in 0.2f64..200.0) {
        let q = chi_square_quantile(p, k).unwrap();
        prop_assert!((chi_square_cdf(q, k) - p).abs() < 1e-9);
    }

    #[test]
    fn quantile_monotone_in_p(p in 0.01f64..0.98, k in 0.5f64..50.0) {
        prop_assert!(chi_square_quantile(p, k).unwrap() < chi_square_quantile(p + 0.01, k).unwrap());
    }

    #[test]
    fn bisection_bracket_width(r in -5.0f64..5.0, tol in 1e-12f64..1e-3) {
        let root = find_root_bracketed(|y| y - r, -10.0, 10.0, tol).unwrap();
        prop_assert!((root - r).abs() <= tol);
    }

    #[test]
    fn bisection_refines_monotonically(r in 0.01f64..0.99) {
        let f = |y: f64| y.powi(3) - r;
        let truth = r.cbrt();
        let coarse = (find_root_bracketed(f, 0.0, 1.0, 1e-4).unwrap() - truth).abs();
        let fine = (find_root_bracketed(f, 0.0, 1.0, 1e-10).unwrap() - truth).abs();
        prop_assert!(coarse <= 1e-4 && fine <= 1e-10);
    }
}
