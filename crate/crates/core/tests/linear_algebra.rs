//! Tridiagonal eigensolver against a dense reference.

use edgecurves::tridiag::{eigenvector, kth_eigenvalue, lowest_eigenvalues, SymTridiag};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn dense(t: &SymTridiag) -> DMatrix<f64> {
    let n = t.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = t.diag()[i];
    }
    for (i, &e) in t.off().iter().enumerate() {
        m[(i, i + 1)] = e;
        m[(i + 1, i)] = e;
    }
    m
}

fn reference(t: &SymTridiag) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(dense(t)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn matrix() -> impl Strategy<Value = SymTridiag> {
    (2usize..=200).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0..10.0f64, n),
            // off-diagonal magnitudes kept away from zero so eigenvalues stay simple
            prop::collection::vec(prop_oneof![-5.0..-0.05f64, 0.05..5.0f64], n - 1),
        )
            .prop_map(|(d, e)| SymTridiag::new(d, e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sturm_count_matches_dense(t in matrix(), probes in prop::collection::vec(-25.0..25.0f64, 8)) {
        let eig = reference(&t);
        for x in probes {
            let below = eig.iter().filter(|&&e| e < x).count();
            let near = eig.iter().any(|&e| (e - x).abs() < 1e-9);
            if !near {
                prop_assert_eq!(t.sturm_count(x), below, "x = {}", x);
            }
        }
    }

    #[test]
    fn lowest_eigenvalues_sorted_and_exact(t in matrix()) {
        let eig = reference(&t);
        let k = eig.len().min(6);
        let got = lowest_eigenvalues(&t, k).unwrap();
        prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
        for (g, e) in got.iter().zip(&eig) {
            prop_assert!((g - e).abs() <= 1e-8 * (1.0 + e.abs()), "{} vs {}", g, e);
        }
    }

    #[test]
    fn tighter_tolerance_moves_within_previous(t in matrix(), k in 0usize..4) {
        let k = k.min(t.dim() - 1);
        let coarse = kth_eigenvalue(&t, k, 1e-6).unwrap();
        let fine = kth_eigenvalue(&t, k, 1e-12).unwrap();
        let scale = t.norm_inf().max(1.0);
        prop_assert!((coarse - fine).abs() <= 1e-6 * scale, "{} vs {}", coarse, fine);
    }

    #[test]
    fn eigenvector_residual(t in matrix(), k in 0usize..4) {
        let k = k.min(t.dim() - 1);
        let nu = kth_eigenvalue(&t, k, 1e-13).unwrap();
        let v = eigenvector(&t, nu).unwrap();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        let r = t.apply(&v).iter().zip(&v).map(|(a, b)| (a - nu * b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(r < 1e-7 * t.norm_inf().max(1.0), "residual {}", r);
    }

    #[test]
    fn deterministic(t in matrix()) {
        let a = lowest_eigenvalues(&t, 2.min(t.dim())).unwrap();
        let b = lowest_eigenvalues(&t, 2.min(t.dim())).unwrap();
        prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn gershgorin_encloses_spectrum() {
    let t = SymTridiag::new(vec![2.0, -1.0, 4.0, 0.5], vec![1.0, -2.0, 0.3]).unwrap();
    let (lo, hi) = t.gershgorin();
    let eig = reference(&t);
    assert!(lo <= eig[0] && eig[3] <= hi);
}
