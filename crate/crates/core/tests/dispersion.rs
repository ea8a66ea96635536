//! Dispersion curves, symmetry canonicalization and conductance.

use edgecurves::conductance::{
    build_window, conductance_by_limits, level_energy, ConductanceReport, LevelWindow,
};
use edgecurves::dispersion::{
    branch_limits, canonicalize, evaluate, fixed_point_function, sweep, Limit, SolverConfig,
};
use edgecurves::{Branch, Error, FiberParams, Gamma, Sign};
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn lambda(br: Branch, b: f64, gamma: Gamma, xi: f64) -> f64 {
    evaluate(br, &FiberParams::new(b, gamma, xi).unwrap(), &cfg()).unwrap().lambda
}

fn gamma_strategy() -> impl Strategy<Value = Gamma> {
    prop_oneof![
        Just(Gamma::Infinite),
        Just(Gamma::Finite(0.0)),
        (-8.0..8.0f64).prop_map(Gamma::Finite),
    ]
}

fn branch_strategy() -> impl Strategy<Value = Branch> {
    (any::<bool>(), 1u32..=3).prop_map(|(p, n)| if p { Branch::plus(n) } else { Branch::minus(n) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonical_map_is_consistent(
        b in prop_oneof![-3.0..-0.2f64, 0.2..3.0f64],
        gamma in gamma_strategy(),
        xi in -4.0..4.0f64,
        br in branch_strategy(),
    ) {
        let fp = FiberParams::new(b, gamma, xi).unwrap();
        let (can, t) = canonicalize(&fp).unwrap();
        prop_assert!(can.is_canonical());
        prop_assert_eq!(can.b, b.abs());
        prop_assert_eq!(can.xi, t.xi(xi));
        prop_assert_eq!(t.branch(t.branch(br)), br);
        prop_assert_eq!(t.value(t.value(1.25)), 1.25);
        prop_assert_eq!(t.flip_branch_sign, t.negate_spectrum);
        let (again, id) = canonicalize(&can).unwrap();
        prop_assert_eq!(again, can);
        prop_assert!(id.is_identity());
    }

    #[test]
    fn requested_values_follow_the_canonical_ones(
        b in prop_oneof![-2.0..-0.5f64, 0.5..2.0f64],
        gamma in gamma_strategy(),
        xi in -3.0..3.0f64,
        br in branch_strategy(),
    ) {
        let fp = FiberParams::new(b, gamma, xi).unwrap();
        let (can, t) = canonicalize(&fp).unwrap();
        let req = evaluate(br, &fp, &cfg()).unwrap();
        let base = evaluate(t.branch(br), &can, &cfg()).unwrap();
        prop_assert_eq!(req.lambda.to_bits(), t.value(base.lambda).to_bits());
        prop_assert_eq!(req.slope.to_bits(), t.slope(base.slope).to_bits());
        // the requested branch keeps its own sign class
        prop_assert!(req.lambda * br.sign.factor() >= 0.0);
    }

    #[test]
    fn branches_are_ordered(gamma in 0.05..10.0f64, xi in -4.0..4.0f64) {
        for sign in [Sign::Plus, Sign::Minus] {
            let v: Vec<f64> = (1..=3)
                .map(|n| lambda(Branch::new(sign, n).unwrap(), 1.0, Gamma::Finite(gamma), xi).abs())
                .collect();
            prop_assert!(v.windows(2).all(|w| w[1] > w[0]), "{:?} {:?}", sign, v);
        }
    }

    #[test]
    fn monotone_in_gamma(g1 in 0.1..5.0f64, ratio in 1.2..4.0f64, xi in -1.0..4.0f64, n in 1u32..=3) {
        let g2 = g1 * ratio;
        let p1 = lambda(Branch::plus(n), 1.0, Gamma::Finite(g1), xi);
        let p2 = lambda(Branch::plus(n), 1.0, Gamma::Finite(g2), xi);
        prop_assert!(p2 > p1, "+{}: {} then {}", n, p1, p2);
        let m1 = lambda(Branch::minus(n), 1.0, Gamma::Finite(g1), xi);
        let m2 = lambda(Branch::minus(n), 1.0, Gamma::Finite(g2), xi);
        // λ⁻ = −θ⁻ with θ⁻ decreasing in γ
        prop_assert!(m2 > m1, "-{}: {} then {}", n, m1, m2);
    }

    #[test]
    fn slope_matches_difference(
        gamma in gamma_strategy(),
        xi in -3.0..3.0f64,
        br in branch_strategy(),
    ) {
        let h = 1e-4;
        let fp = FiberParams::new(1.0, gamma, xi).unwrap();
        let s = evaluate(br, &fp, &cfg()).unwrap().slope;
        let fd = (lambda(br, 1.0, gamma, xi + h) - lambda(br, 1.0, gamma, xi - h)) / (2.0 * h);
        prop_assert!((s - fd).abs() <= 2e-3, "{} at gamma={} xi={}: {} vs {}", br, gamma, xi, s, fd);
    }

    #[test]
    fn window_is_a_partition_of_unity_on_levels(
        sel in prop::collection::btree_set(-3i64..=3, 1..4),
        shrink in 0.3..1.0f64,
    ) {
        let sel: Vec<i64> = sel.into_iter().collect();
        let w = LevelWindow::new(1.0, &sel, None).unwrap();
        let w = w.with_delta(w.delta * shrink).unwrap();
        let f = build_window(&w).unwrap();
        for k in -5i64..=5 {
            let e = level_energy(k, 1.0);
            prop_assert_eq!(f.value(e), if sel.contains(&k) { 1.0 } else { 0.0 });
            prop_assert_eq!(f.derivative(e), 0.0);
        }
        for i in 0..200 {
            let x = -4.0 + 0.04 * f64::from(i);
            let v = f.value(x);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn fixed_point_has_a_unique_root() {
    let g = |n: u32, xi: f64| cfg().grid(1.0, xi, n);
    for gamma in [0.5, 1.0, 2.0] {
        for xi in [-2.0, 0.0, 2.0] {
            for n in 1..=3u32 {
                for sign in [Sign::Plus, Sign::Minus] {
                    let br = Branch::new(sign, n).unwrap();
                    let fp = FiberParams::new(1.0, Gamma::Finite(gamma), xi).unwrap();
                    let grid = g(n, xi);
                    let f0 = fixed_point_function(br, &fp, &grid, 0.0).unwrap();
                    assert!(f0 >= -1e-6, "{br} gamma={gamma} xi={xi}: f(0) = {f0}");
                    let cap = (2.0 * f64::from(n + 1)).sqrt() + 1.0 + 2.0 * xi.max(0.0);
                    let theta = evaluate(br, &fp, &cfg()).unwrap().theta;
                    assert!(theta > 0.0 && theta < cap);
                    // f > 0 below the root and f < 0 above it: exactly one sign change
                    let steps = (cap / 0.05).ceil() as usize;
                    for k in 1..=steps {
                        let l = 0.05 * k as f64;
                        if (l - theta).abs() < 1e-3 {
                            continue;
                        }
                        let f = fixed_point_function(br, &fp, &grid, l).unwrap();
                        assert_eq!(f > 0.0, l < theta, "{br} gamma={gamma} xi={xi} lambda={l}: f = {f}");
                    }
                }
            }
        }
    }
}

#[test]
fn zigzag_pointwise_limits() {
    for k in -4..=4 {
        let xi = f64::from(k);
        for br in [Branch::plus(1), Branch::plus(2), Branch::minus(1), Branch::minus(2)] {
            let small = lambda(br, 1.0, Gamma::Finite(1e-3), xi);
            let zero = lambda(br, 1.0, Gamma::Finite(0.0), xi);
            assert!((small - zero).abs() <= 0.05, "{br} xi={xi}: {small} vs {zero}");
            let large = lambda(br, 1.0, Gamma::Finite(1e3), xi);
            let inf = lambda(br, 1.0, Gamma::Infinite, xi);
            assert!((large - inf).abs() <= 0.05, "{br} xi={xi}: {large} vs {inf}");
        }
    }
}

#[test]
fn sweeps_match_pointwise_evaluation() {
    let brs = [Branch::minus(2), Branch::plus(1), Branch::plus(3)];
    let curves = sweep(Gamma::Finite(0.8), 1.0, -3.0, 3.0, 41, &brs, &cfg()).unwrap();
    for c in &curves {
        for i in [0, 17, 40] {
            let direct = lambda(c.branch, 1.0, Gamma::Finite(0.8), c.xis[i]);
            assert!((c.lambda(i) - direct).abs() <= 1e-8, "{} at {}", c.branch, c.xis[i]);
        }
    }
}

#[test]
fn limits_catalog_and_negative_field() {
    let (l, r) = branch_limits(Branch::plus(1), Gamma::Finite(0.0), 1.0).unwrap();
    assert_eq!((l, r), (Limit::Finite(0.0), Limit::Finite(0.0)));
    let (l, r) = branch_limits(Branch::minus(2), Gamma::Finite(1.0), 1.0).unwrap();
    assert_eq!(l, Limit::Finite(-2.0));
    assert_eq!(r, Limit::MinusInf);
    // b < 0 swaps the ends
    let (l, r) = branch_limits(Branch::plus(2), Gamma::Finite(1.0), -1.0).unwrap();
    assert_eq!(l, Limit::PlusInf);
    assert_eq!(r, Limit::Finite(2.0));
}

#[test]
fn conductance_table_and_sign_rule() {
    let windows: [&[i64]; 3] = [&[0], &[0, 1], &[-1, 0, 1]];
    for sel in windows {
        let n = sel.len() as i64;
        for (gamma, want) in [
            (Gamma::Finite(0.0), n - 1),
            (Gamma::Finite(0.3), n),
            (Gamma::Finite(1.0), n),
            (Gamma::Finite(3.0), n),
            (Gamma::Infinite, n + 1),
        ] {
            let w = LevelWindow::new(1.0, sel, None).unwrap();
            let r = conductance_by_limits(gamma, 1.0, &w).unwrap();
            assert_eq!(r.integer, want, "gamma={gamma} {sel:?}");
            assert_eq!(r.per_curve.iter().map(|c| c.contribution).sum::<f64>(), r.integer as f64);
            assert!(r.per_curve.iter().all(|c| c.contribution.abs() <= 1.0));

            let half = conductance_by_limits(gamma, 1.0, &w.with_delta(w.delta / 2.0).unwrap()).unwrap();
            assert_eq!(half.integer, r.integer);

            let wn = LevelWindow::new(-1.0, sel, None).unwrap();
            let neg = conductance_by_limits(gamma.inverse(), -1.0, &wn).unwrap();
            assert_eq!(neg.integer, -r.integer, "b=-1 gamma={} {sel:?}", gamma.inverse());

            let json = serde_json::to_string(&r).unwrap();
            let back: ConductanceReport = serde_json::from_str(&json).unwrap();
            assert_eq!(back.integer, r.integer);
            assert_eq!(back.per_curve.len(), r.per_curve.len());
        }
    }
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(matches!(
        FiberParams::new(0.0, Gamma::Finite(1.0), 0.0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(LevelWindow::new(1.0, &[], None).is_err());
    assert!(LevelWindow::new(1.0, &[0], Some(10.0)).is_err());
    assert!(sweep(Gamma::Finite(1.0), 1.0, 1.0, -1.0, 5, &[Branch::plus(1)], &cfg()).is_err());
}
