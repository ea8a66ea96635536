//! Half-line Schrödinger families and the staggered Dirac fiber.

use edgecurves::dirac::{assemble_dirac, feynman_hellmann_velocity, reconstruct_spinor};
use edgecurves::dispersion::{curve_slope, evaluate, solve_branch, SolverConfig};
use edgecurves::grid::{auto_grid, default_spacing, Grid};
use edgecurves::schrodinger::{nu, nu_dirichlet, nu_partial_alpha, nu_partial_xi, RobinFiberParams};
use edgecurves::{Branch, FiberParams, Gamma, Sign};
use proptest::prelude::*;

const ALPHAS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];
const XIS: [f64; 5] = [-4.0, -1.0, 0.0, 1.0, 4.0];

fn grid() -> Grid {
    auto_grid(1.0, -4.0, 5, default_spacing(1.0))
}

fn robin(sign: Sign, alpha: f64, xi: f64, n: u32, g: &Grid) -> f64 {
    nu(&RobinFiberParams::new(sign, 1.0, alpha, xi).unwrap(), n, g).unwrap().nu
}

#[test]
fn increasing_in_alpha() {
    let g = grid();
    for sign in [Sign::Plus, Sign::Minus] {
        for xi in XIS {
            for n in 1..=3 {
                let vals: Vec<f64> = ALPHAS.iter().map(|&a| robin(sign, a, xi, n, &g)).collect();
                assert!(
                    vals.windows(2).all(|w| w[1] > w[0]),
                    "{sign:?} n={n} xi={xi}: {vals:?}"
                );
            }
        }
    }
}

#[test]
fn ordered_and_simple() {
    let g = grid();
    for sign in [Sign::Plus, Sign::Minus] {
        for xi in XIS {
            for a in ALPHAS {
                let vals: Vec<f64> = (1..=4).map(|n| robin(sign, a, xi, n, &g)).collect();
                assert!(vals.windows(2).all(|w| w[1] - w[0] > 1e-9), "{sign:?} a={a} xi={xi}: {vals:?}");
            }
        }
    }
}

#[test]
fn dirichlet_ordering_and_monotonicity() {
    let g = grid();
    let mut prev = vec![f64::NEG_INFINITY; 3];
    for k in 0..=16 {
        let xi = -4.0 + 0.5 * f64::from(k);
        let vals: Vec<f64> = (1..=3).map(|n| nu_dirichlet(1.0, xi, n, &g).unwrap().nu).collect();
        assert!(vals[0] > 2.0, "xi={xi}: {}", vals[0]);
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        for (v, p) in vals.iter().zip(&prev) {
            assert!(v > p, "not increasing at xi={xi}");
        }
        prev = vals;
    }
}

#[test]
fn minus_family_below_dirichlet() {
    let g = grid();
    for xi in XIS {
        for n in 1..=3 {
            let dir = nu_dirichlet(1.0, xi, n, &g).unwrap().nu;
            for a in ALPHAS.into_iter().chain([50.0]) {
                assert!(robin(Sign::Minus, a, xi, n, &g) <= dir + 1e-9, "n={n} xi={xi} a={a}");
            }
        }
    }
}

#[test]
fn alpha_zero_identities() {
    let g = grid();
    let close = |a: f64, b: f64| (a - b).abs() <= 2e-3 * b.abs().max(1.0);
    for xi in XIS {
        assert!(robin(Sign::Plus, 0.0, xi, 1, &g).abs() <= 2e-3);
        for n in 2..=3 {
            let want = nu_dirichlet(1.0, xi, n - 1, &g).unwrap().nu;
            assert!(close(robin(Sign::Plus, 0.0, xi, n, &g), want), "+ n={n} xi={xi}");
        }
        for n in 1..=3 {
            let want = nu_dirichlet(-1.0, -xi, n, &g).unwrap().nu;
            assert!(close(robin(Sign::Minus, 0.0, xi, n, &g), want), "- n={n} xi={xi}");
        }
    }
}

#[test]
fn dirichlet_second_order() {
    let err = |n: usize| (nu_dirichlet(1.0, 0.0, 1, &edgecurves::make_grid(8.0, n).unwrap()).unwrap().nu - 4.0).abs();
    let ratio = err(200) / err(400);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

fn derivative_case(sign: Sign, alpha: f64, xi: f64, n: u32) -> Result<(), TestCaseError> {
    let g = grid();
    let p = RobinFiberParams::new(sign, 1.0, alpha, xi).unwrap();
    let e = nu(&p, n, &g).unwrap();
    let h = 1e-4;
    let fd_alpha = (robin(sign, alpha + h, xi, n, &g) - robin(sign, alpha - h, xi, n, &g)) / (2.0 * h);
    let fd_xi = (robin(sign, alpha, xi + h, n, &g) - robin(sign, alpha, xi - h, n, &g)) / (2.0 * h);
    let da = nu_partial_alpha(&e).unwrap();
    let dx = nu_partial_xi(&e).unwrap();
    prop_assert!((da - fd_alpha).abs() <= 1e-3 * fd_alpha.abs().max(1.0), "d_alpha {} vs {}", da, fd_alpha);
    prop_assert!((dx - fd_xi).abs() <= 1e-3 * fd_xi.abs().max(1.0), "d_xi {} vs {}", dx, fd_xi);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn alpha_monotone_random(
        plus in any::<bool>(),
        a1 in 0.0..5.0f64,
        gap in 0.05..3.0f64,
        xi in -4.0..4.0f64,
        n in 1u32..=3,
    ) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let g = grid();
        prop_assert!(robin(sign, a1 + gap, xi, n, &g) > robin(sign, a1, xi, n, &g));
    }

    #[test]
    fn derivative_identities(
        plus in any::<bool>(),
        alpha in 0.1..4.0f64,
        xi in -3.0..3.0f64,
        n in 1u32..=3,
    ) {
        derivative_case(if plus { Sign::Plus } else { Sign::Minus }, alpha, xi, n)?;
    }
}

fn dirac_grid(xi: f64) -> Grid {
    SolverConfig::default().grid(1.0, xi, 3)
}

#[test]
fn dirac_matrix_is_exactly_symmetric() {
    let g = edgecurves::make_grid(5.0, 200).unwrap();
    for gamma in [Gamma::Finite(0.0), Gamma::Finite(0.5), Gamma::Finite(-3.0), Gamma::Infinite] {
        for b in [1.0, -2.0] {
            let sys = assemble_dirac(&FiberParams::new(b, gamma, 0.7).unwrap(), &g).unwrap();
            let m = sys.to_dense();
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert_eq!(v.to_bits(), m[j][i].to_bits());
                }
            }
        }
    }
}

#[test]
fn reconstructed_spinors_solve_the_dirac_problem() {
    for gamma in [0.5, 1.0, 2.0] {
        for xi in [-1.0, 0.0, 1.5] {
            let fp = FiberParams::new(1.0, Gamma::Finite(gamma), xi).unwrap();
            let g = dirac_grid(xi);
            let sys = assemble_dirac(&fp, &g).unwrap();
            for br in [Branch::plus(1), Branch::plus(2), Branch::minus(1), Branch::minus(2)] {
                let sol = solve_branch(br, &fp, &g).unwrap();
                let e = sol.pair.as_ref().unwrap();
                let s = reconstruct_spinor(e, sol.theta, &fp, &g).unwrap();
                let lambda = br.sign.factor() * sol.theta;
                assert!((s.lambda - lambda).abs() < 1e-12);
                let r = sys.residual(&s, lambda) / s.norm();
                assert!(r < 5e-2, "{br} gamma={gamma} xi={xi}: residual {r}");
                assert!(s.boundary_residual() < 5e-3, "{br} gamma={gamma} xi={xi}");

                let (p1, p2) = s.boundary_values();
                assert!((p2 - gamma * p1).abs() <= 5e-3 * s.norm());

                let v = feynman_hellmann_velocity(&s);
                let slope = curve_slope(br, &fp, sol.theta, Some(e)).unwrap();
                assert!((v - slope).abs() <= 2e-3, "{br} gamma={gamma} xi={xi}: {v} vs {slope}");
            }
        }
    }
}

#[test]
fn dirac_eigenvalues_match_fixed_point() {
    for gamma in [Gamma::Finite(0.5), Gamma::Finite(2.0), Gamma::Infinite, Gamma::Finite(0.0)] {
        for xi in [-1.0, 0.0, 2.0] {
            let fp = FiberParams::new(1.0, gamma, xi).unwrap();
            let sys = assemble_dirac(&fp, &dirac_grid(xi)).unwrap();
            let (pos, neg) = sys.branch_values(3).unwrap();
            for n in 1..=3u32 {
                let cfg = SolverConfig::default();
                let p = evaluate(Branch::plus(n), &fp, &cfg).unwrap().lambda;
                let m = evaluate(Branch::minus(n), &fp, &cfg).unwrap().lambda;
                let i = n as usize - 1;
                assert!((pos[i] - p).abs() <= 1e-3 * (1.0 + p.abs()), "gamma={gamma} xi={xi} +{n}");
                assert!((neg[i] + m).abs() <= 1e-3 * (1.0 + m.abs()), "gamma={gamma} xi={xi} -{n}");
            }
        }
    }
}

#[test]
fn charge_conjugation_on_the_grid() {
    let g = edgecurves::make_grid(9.0, 1800).unwrap();
    for gamma in [0.5, 2.0] {
        for xi in [-1.0, 0.5] {
            let direct = assemble_dirac(&FiberParams::new(-1.0, Gamma::Finite(gamma), xi).unwrap(), &g).unwrap();
            let mapped = assemble_dirac(&FiberParams::new(1.0, Gamma::Finite(1.0 / gamma), -xi).unwrap(), &g).unwrap();
            let (dp, dn) = direct.branch_values(3).unwrap();
            let (mp, mn) = mapped.branch_values(3).unwrap();
            for i in 0..3 {
                assert!((dp[i] - mn[i]).abs() <= 1e-6, "gamma={gamma} xi={xi}");
                assert!((dn[i] - mp[i]).abs() <= 1e-6, "gamma={gamma} xi={xi}");
            }
        }
    }
}
