//! Half-line Schrödinger fibers: the Robin operators `h±_{α,ξ}` behind the
//! fixed-point characterization, and the Dirichlet Pauli operator `H_ξ(b)`.
//!
//! Both are discretized through their quadratic forms with trapezoid masses
//! (`w₀ = h/2`, `w_j = h`), giving a symmetric generalized problem
//! `A u = ν W u` that is reduced to `B = W^{-1/2} A W^{-1/2}`. The truncation
//! node `x_N` is always eliminated (`u_N = 0`). The Robin boundary term enters
//! as the single scalar `c·u₀²`:
//!
//! ```text
//! q⁺(u) = ‖u′‖² + ‖(ξ+bx)u‖² − b‖u‖² + (α − ξ) u(0)²
//! q⁻(u) = ‖u′‖² + ‖(ξ+bx)u‖² + b‖u‖² + (α + ξ) u(0)²
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::Sign;
use crate::tridiag::{self, Hint, SymTridiag};

/// Eigenvalues below `-TOL_FORM` are treated as a resolution failure: the
/// continuum forms are non-negative.
pub const TOL_FORM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobinFiberParams {
    pub sign: Sign,
    pub b: f64,
    pub alpha: f64,
    pub xi: f64,
}

impl RobinFiberParams {
    pub fn new(sign: Sign, b: f64, alpha: f64, xi: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("Robin fibers need b > 0, got {b}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        if !xi.is_finite() {
            return Err(Error::InvalidParameter(format!("xi must be finite, got {xi}")));
        }
        Ok(Self { sign, b, alpha, xi })
    }

    /// Shifted potential `Ṽ(x) = (ξ+bx)² ∓ b`.
    pub fn potential(&self, x: f64) -> f64 {
        let m = self.xi + self.b * x;
        match self.sign {
            Sign::Plus => m * m - self.b,
            Sign::Minus => m * m + self.b,
        }
    }

    /// Boundary coefficient `c = α ∓ ξ`.
    pub fn boundary_coefficient(&self) -> f64 {
        match self.sign {
            Sign::Plus => self.alpha - self.xi,
            Sign::Minus => self.alpha + self.xi,
        }
    }
}

/// Which half-line problem an [`EigenPair`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Problem {
    Robin(RobinFiberParams),
    /// `−∂² + (ξ+bx)² + b` with `u(0) = 0`; `b` may have either sign.
    Dirichlet { b: f64, xi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub nu: f64,
    /// 1-based index.
    pub n: u32,
    /// Boundary value `u(0)`; zero for Dirichlet problems.
    pub u0: f64,
    /// Eigenfunction on all grid nodes `0..=N` (eliminated nodes hold 0),
    /// normalized in the trapezoid inner product.
    pub samples: Vec<f64>,
    pub problem: Problem,
    pub grid: Grid,
}

impl EigenPair {
    /// Trapezoid weight of node `j` for this problem's inner product.
    pub fn weight(&self, j: usize) -> f64 {
        node_weight(&self.grid, j)
    }

    pub fn weighted_norm(&self) -> f64 {
        self.samples
            .iter()
            .enumerate()
            .map(|(j, u)| self.weight(j) * u * u)
            .sum::<f64>()
            .sqrt()
    }
}

fn node_weight(g: &Grid, j: usize) -> f64 {
    let h = g.spacing();
    if j == 0 || j == g.intervals() {
        0.5 * h
    } else {
        h
    }
}

/// Generalized Robin system `(A, W)` and its symmetric reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinSystem {
    pub a_diag: Vec<f64>,
    pub a_off: Vec<f64>,
    pub weights: Vec<f64>,
    pub reduced: SymTridiag,
}

pub fn assemble_robin(p: &RobinFiberParams, g: &Grid) -> RobinSystem {
    let h = g.spacing();
    let m = g.intervals(); // unknowns u_0 .. u_{N-1}
    let mut a_diag = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for j in 0..m {
        let w = node_weight(g, j);
        let stiff = if j == 0 { 1.0 / h } else { 2.0 / h };
        let mut d = stiff + w * p.potential(g.node(j));
        if j == 0 {
            d += p.boundary_coefficient();
        }
        a_diag.push(d);
        weights.push(w);
    }
    let a_off = vec![-1.0 / h; m - 1];
    let reduced = reduce(&a_diag, &a_off, &weights);
    RobinSystem {
        a_diag,
        a_off,
        weights,
        reduced,
    }
}

fn reduce(a_diag: &[f64], a_off: &[f64], w: &[f64]) -> SymTridiag {
    let diag = a_diag.iter().zip(w).map(|(a, w)| a / w).collect();
    // weights take at most two distinct values, so the square roots are
    // evaluated once per value
    let inv_sqrt: Vec<f64> = w.iter().map(|w| 1.0 / w.sqrt()).collect();
    let off = a_off
        .iter()
        .enumerate()
        .map(|(j, a)| a * inv_sqrt[j] * inv_sqrt[j + 1])
        .collect();
    SymTridiag::new(diag, off).expect("finite entries")
}

fn resolution_guard(n: u32, g: &Grid) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("eigenvalue index must be >= 1".into()));
    }
    if n as usize > g.intervals() / 4 {
        return Err(Error::RefineGrid(format!(
            "index {n} exceeds N/4 = {} on this grid",
            g.intervals() / 4
        )));
    }
    Ok(())
}

fn check_floor(nu: f64, what: &str) -> Result<()> {
    if nu < -TOL_FORM {
        return Err(Error::RefineGrid(format!(
            "{what} eigenvalue {nu:e} is below -{TOL_FORM:e}"
        )));
    }
    Ok(())
}

/// n-th Robin eigenpair of `h^{sign}_{α,ξ}`.
pub fn nu(p: &RobinFiberParams, n: u32, g: &Grid) -> Result<EigenPair> {
    nu_near(p, n, g, None)
}

/// As [`nu`], with an eigenvalue estimate to start the bisection bracket.
pub fn nu_near(p: &RobinFiberParams, n: u32, g: &Grid, hint: Option<f64>) -> Result<EigenPair> {
    nu_with(p, n, g, hint.map(Hint::new), None, tridiag::DEFAULT_TOL)
}

/// As [`nu`], with full control of the bracket hint, a previous eigenpair on
/// the same grid to start inverse iteration from, and the relative eigenvalue
/// tolerance.
pub fn nu_with(
    p: &RobinFiberParams,
    n: u32,
    g: &Grid,
    hint: Option<Hint>,
    start: Option<&EigenPair>,
    rel_tol: f64,
) -> Result<EigenPair> {
    resolution_guard(n, g)?;
    let sys = assemble_robin(p, g);
    let sqrt_w: Vec<f64> = sys.weights.iter().map(|w| w.sqrt()).collect();
    let y0: Option<Vec<f64>> = start
        .filter(|e| e.grid == *g && e.samples.len() == sqrt_w.len() + 1)
        .map(|e| e.samples.iter().zip(&sqrt_w).map(|(u, s)| u * s).collect());
    let (value, y) =
        tridiag::eigenpair_from(&sys.reduced, n as usize - 1, hint, y0.as_deref(), rel_tol)?;
    check_floor(value, "Robin")?;
    let mut samples: Vec<f64> = y.iter().zip(&sqrt_w).map(|(y, s)| y / s).collect();
    samples.push(0.0);
    Ok(EigenPair {
        nu: value,
        n,
        u0: samples[0],
        samples,
        problem: Problem::Robin(*p),
        grid: *g,
    })
}

/// Reduced Dirichlet matrix for `−∂² + (ξ+bx)² + b` on interior nodes.
pub fn assemble_dirichlet(b: f64, xi: f64, g: &Grid) -> SymTridiag {
    let h = g.spacing();
    let inv_h2 = 1.0 / (h * h);
    let diag = (1..g.intervals())
        .map(|j| {
            let m = xi + b * g.node(j);
            2.0 * inv_h2 + m * m + b
        })
        .collect();
    let off = vec![-inv_h2; g.intervals() - 2];
    SymTridiag::new(diag, off).expect("finite entries")
}

/// n-th eigenpair of the Dirichlet Pauli fiber `H_ξ(b)`; `b` may be negative.
pub fn nu_dirichlet(b: f64, xi: f64, n: u32, g: &Grid) -> Result<EigenPair> {
    nu_dirichlet_near(b, xi, n, g, None)
}

pub fn nu_dirichlet_near(b: f64, xi: f64, n: u32, g: &Grid, hint: Option<f64>) -> Result<EigenPair> {
    nu_dirichlet_with(b, xi, n, g, hint.map(Hint::new))
}

pub fn nu_dirichlet_with(b: f64, xi: f64, n: u32, g: &Grid, hint: Option<Hint>) -> Result<EigenPair> {
    if !(b.is_finite() && b != 0.0 && xi.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad Dirichlet parameters b={b}, xi={xi}")));
    }
    resolution_guard(n, g)?;
    let t = assemble_dirichlet(b, xi, g);
    let (value, y) =
        tridiag::eigenpair(&t, n as usize - 1, hint, tridiag::DEFAULT_TOL)?;
    check_floor(value, "Dirichlet")?;
    let scale = 1.0 / g.spacing().sqrt();
    let mut samples = Vec::with_capacity(g.intervals() + 1);
    samples.push(0.0);
    samples.extend(y.iter().map(|v| v * scale));
    samples.push(0.0);
    Ok(EigenPair {
        nu: value,
        n,
        u0: 0.0,
        samples,
        problem: Problem::Dirichlet { b, xi },
        grid: *g,
    })
}

fn robin_params(e: &EigenPair) -> Result<RobinFiberParams> {
    match e.problem {
        Problem::Robin(p) => Ok(p),
        Problem::Dirichlet { .. } => Err(Error::Domain(
            "closed-form derivative needs a Robin eigenpair".into(),
        )),
    }
}

/// `∂_α ν = u(0)²`.
pub fn nu_partial_alpha(e: &EigenPair) -> Result<f64> {
    robin_params(e)?;
    Ok(e.u0 * e.u0)
}

/// `∂_ξ ν± = (ν + α² ∓ 2αξ) u(0)² / b`.
pub fn nu_partial_xi(e: &EigenPair) -> Result<f64> {
    let p = robin_params(e)?;
    Ok(xi_derivative(&p, e.nu, e.u0))
}

/// The ξ-derivative formula with an explicit eigenvalue and boundary value.
pub fn xi_derivative(p: &RobinFiberParams, nu: f64, u0: f64) -> f64 {
    let cross = 2.0 * p.alpha * p.xi;
    let bracket = match p.sign {
        Sign::Plus => nu + p.alpha * p.alpha - cross,
        Sign::Minus => nu + p.alpha * p.alpha + cross,
    };
    bracket * u0 * u0 / p.b
}

/// `∂_ξ ν^Dir` for a Dirichlet pair, as the expectation of `2(ξ+bx)`.
///
/// This is the exact derivative of the discrete eigenvalue.
pub fn dirichlet_partial_xi(e: &EigenPair) -> Result<f64> {
    let Problem::Dirichlet { b, xi } = e.problem else {
        return Err(Error::Domain("expected a Dirichlet eigenpair".into()));
    };
    Ok(e.samples
        .iter()
        .enumerate()
        .map(|(j, u)| e.weight(j) * 2.0 * (xi + b * e.grid.node(j)) * u * u)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{auto_grid, default_spacing, make_grid};

    fn grid(b: f64, xi: f64, n: usize) -> Grid {
        auto_grid(b, xi, n, default_spacing(b))
    }

    #[test]
    fn boundary_row_on_unit_grid() {
        let p = RobinFiberParams::new(Sign::Plus, 1.0, 1.0, 0.0).unwrap();
        let g = make_grid(8.0, 8).unwrap();
        let sys = assemble_robin(&p, &g);
        // 1/h + (h/2)(0² − 1) + (α − ξ) with h = 1
        assert!((sys.a_diag[0] - 1.5).abs() < 1e-15);
        assert_eq!(sys.weights[0], 0.5);
        assert!(sys.weights[1..].iter().all(|w| *w == 1.0));
    }

    #[test]
    fn minus_sign_neumann_coefficient() {
        let p = RobinFiberParams::new(Sign::Minus, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(p.boundary_coefficient(), 0.0);
        let p = RobinFiberParams::new(Sign::Minus, 1.0, 0.3, 0.5).unwrap();
        assert_eq!(p.boundary_coefficient(), 0.8);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(RobinFiberParams::new(Sign::Plus, -1.0, 0.0, 0.0).is_err());
        assert!(RobinFiberParams::new(Sign::Plus, 1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn flat_zero_mode() {
        let p = RobinFiberParams::new(Sign::Plus, 1.0, 0.0, 0.0).unwrap();
        let e = nu(&p, 1, &grid(1.0, 0.0, 1)).unwrap();
        assert!(e.nu.abs() < 1e-6, "{}", e.nu);
        assert!((e.weighted_norm() - 1.0).abs() < 1e-10);
        // normalized half-line Gaussian: u(0)² = 2/√π
        let expected = 2.0 / std::f64::consts::PI.sqrt();
        assert!((nu_partial_alpha(&e).unwrap() - expected).abs() < 1e-3);
        assert!(nu_partial_xi(&e).unwrap().abs() < 1e-5);
    }

    #[test]
    fn minus_neumann_ground_state() {
        let p = RobinFiberParams::new(Sign::Minus, 1.0, 0.0, 0.0).unwrap();
        let e = nu(&p, 1, &grid(1.0, 0.0, 1)).unwrap();
        assert!((e.nu - 2.0).abs() < 1e-3);
    }

    #[test]
    fn large_alpha_approaches_dirichlet() {
        let p = RobinFiberParams::new(Sign::Minus, 1.0, 1000.0, 0.0).unwrap();
        let e = nu(&p, 1, &grid(1.0, 0.0, 1)).unwrap();
        assert!((e.nu - 4.0).abs() < 0.05, "{}", e.nu);
        assert!(e.nu < 4.0);
    }

    #[test]
    fn dirichlet_odd_hermite() {
        let g = grid(1.0, 0.0, 2);
        assert!((nu_dirichlet(1.0, 0.0, 1, &g).unwrap().nu - 4.0).abs() < 4e-3);
        assert!((nu_dirichlet(1.0, 0.0, 2, &g).unwrap().nu - 8.0).abs() < 8e-3);
        assert!((nu_dirichlet(-1.0, 0.0, 1, &g).unwrap().nu - 2.0).abs() < 2e-3);
        let g = grid(1.0, -8.0, 1);
        assert!((nu_dirichlet(1.0, -8.0, 1, &g).unwrap().nu - 2.0).abs() < 1e-3);
    }

    #[test]
    fn derivative_domain_errors() {
        let g = grid(1.0, 0.0, 1);
        let e = nu_dirichlet(1.0, 0.0, 1, &g).unwrap();
        assert!(matches!(nu_partial_alpha(&e), Err(Error::Domain(_))));
        assert!(matches!(nu_partial_xi(&e), Err(Error::Domain(_))));
        assert!(dirichlet_partial_xi(&e).unwrap() > 0.0);
    }

    #[test]
    fn resolution_guard_trips() {
        let g = make_grid(10.0, 16).unwrap();
        let p = RobinFiberParams::new(Sign::Plus, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(nu(&p, 5, &g), Err(Error::RefineGrid(_))));
        assert!(nu(&p, 4, &g).is_ok());
    }
}
