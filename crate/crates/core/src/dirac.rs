//! Direct discretization of the two-component fiber operator
//!
//! ```text
//! D_{γ,ξ}(b) = [ 0   d  ]      d  = ξ + bx − ∂
//!              [ d†  0  ]      d† = ξ + bx + ∂
//! ```
//!
//! used as an independent oracle for the fixed-point solver.
//!
//! One component lives on the integer nodes `x_j = jh`, the other on the
//! half nodes `x_{j+1/2}`. The scheme comes from the symmetric form
//! `⟨Ψ, DΨ⟩ = 2⟨ψ₂, d†ψ₁⟩ + γ ψ₁(0)²`, in which the boundary condition
//! `ψ₂(0) = γψ₁(0)` is natural; `γ = +∞` removes `ψ₁(0)` instead. For
//! `b < 0` the roles of the components are exchanged (the integer grid carries
//! ψ₂), which keeps the Gaussian zero mode on the integer grid and makes the
//! charge-conjugation map exact on the lattice. Interleaving the two grids
//! gives a symmetric tridiagonal matrix, solved with [`crate::tridiag`].
//!
//! At `x = L` the half-grid component gets the natural condition. This is the
//! component whose kernel grows, so no spurious mode forms at the cut.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{FiberParams, Gamma, Sign};
use crate::schrodinger::{EigenPair, Problem};
use crate::tridiag::{self, SymTridiag};

/// Eigenvalues within this distance of zero are not split by sign when
/// labelling branches; they count as non-negative.
pub const ZERO_SPLIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    /// integer node j
    Node(usize),
    /// half node j + 1/2
    Half(usize),
}

/// Assembled staggered Dirac fiber.
#[derive(Debug, Clone)]
pub struct DiracSystem {
    pub params: FiberParams,
    pub grid: Grid,
    /// Reduced matrix `M^{-1/2} K M^{-1/2}` in interleaved order.
    pub matrix: SymTridiag,
    slots: Vec<Slot>,
    masses: Vec<f64>,
    /// true if ψ₁ sits on the integer grid (b > 0)
    psi1_on_nodes: bool,
}

pub fn assemble_dirac(fp: &FiberParams, g: &Grid) -> Result<DiracSystem> {
    let fp = FiberParams::new(fp.b, fp.gamma, fp.xi)?;
    let h = g.spacing();
    let n = g.intervals();
    let positive = fp.b > 0.0;
    // integer-grid component P, half-grid S; K couples them through
    // s·h·(∂ + m) with m = ξ' + b'x
    let (xi_p, b_p, s) = if positive {
        (fp.xi, fp.b, 1.0)
    } else {
        (-fp.xi, -fp.b, -1.0)
    };
    // boundary weight κ on P(0), or None if P(0) is eliminated
    let kappa: Option<f64> = match (positive, fp.gamma.clamped()) {
        (true, Gamma::Infinite) => None,
        (true, Gamma::Finite(g)) => Some(g),
        (false, Gamma::Infinite) => Some(0.0),
        (false, Gamma::Finite(g)) if g == 0.0 => None,
        (false, Gamma::Finite(g)) => Some(-1.0 / g),
    };

    let mut slots = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        if j > 0 || kappa.is_some() {
            slots.push(Slot::Node(j));
        }
        slots.push(Slot::Half(j));
    }
    slots.push(Slot::Node(n));

    let mass = |slot: Slot| match slot {
        Slot::Node(j) if j == 0 || j == n => 0.5 * h,
        _ => h,
    };
    let masses: Vec<f64> = slots.iter().map(|s| mass(*s)).collect();

    let mut diag = vec![0.0; slots.len()];
    if let (Some(k), Slot::Node(0)) = (kappa, slots[0]) {
        diag[0] = k / masses[0];
    }
    let off = slots
        .windows(2)
        .zip(masses.windows(2))
        .map(|(pair, w)| {
            let coupling = match (pair[0], pair[1]) {
                // P_j – S_j: s·h·(−1/h + m_{j+1/2}/2)
                (Slot::Node(j), Slot::Half(i)) if i == j => {
                    let m = xi_p + b_p * g.half_node(j);
                    s * (-1.0 + 0.5 * h * m)
                }
                // S_j – P_{j+1}: s·h·(1/h + m_{j+1/2}/2)
                (Slot::Half(j), Slot::Node(i)) if i == j + 1 => {
                    let m = xi_p + b_p * g.half_node(j);
                    s * (1.0 + 0.5 * h * m)
                }
                _ => unreachable!("interleaved layout"),
            };
            coupling / (w[0] * w[1]).sqrt()
        })
        .collect();

    Ok(DiracSystem {
        params: fp,
        grid: *g,
        matrix: SymTridiag::new(diag, off)?,
        slots,
        masses,
        psi1_on_nodes: positive,
    })
}

impl DiracSystem {
    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    /// Dense copy of the reduced matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.matrix.diag()[i];
        }
        for (i, e) in self.matrix.off().iter().enumerate() {
            m[i][i + 1] = *e;
            m[i + 1][i] = *e;
        }
        m
    }

    fn eigenvalue(&self, index: usize) -> Result<f64> {
        tridiag::kth_eigenvalue(&self.matrix, index, 1e-12)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.matrix.sturm_count(x)
    }

    /// Spinor for the eigenvalue with ascending index `index`.
    pub fn eigenspinor(&self, index: usize) -> Result<Spinor> {
        let lambda = self.eigenvalue(index)?;
        let y = tridiag::eigenvector(&self.matrix, lambda)?;
        Ok(self.spinor_from_reduced(&y, lambda))
    }

    /// Positive-branch eigenvalue `θ⁺_n` (`sign = Plus`) or the magnitude
    /// `θ⁻_n` of the n-th negative one, together with its spinor.
    pub fn branch_spinor(&self, sign: Sign, n: u32) -> Result<Spinor> {
        self.eigenspinor(self.branch_index(sign, n)?)
    }

    fn branch_index(&self, sign: Sign, n: u32) -> Result<usize> {
        if n == 0 {
            return Err(Error::InvalidParameter("branch index must be >= 1".into()));
        }
        let m0 = self.count_below(-ZERO_SPLIT);
        let idx = match sign {
            Sign::Plus => m0 + n as usize - 1,
            Sign::Minus => m0
                .checked_sub(n as usize)
                .ok_or(Error::Size { requested: n as usize, dim: m0 })?,
        };
        if idx >= self.dim() {
            return Err(Error::Size { requested: idx + 1, dim: self.dim() });
        }
        Ok(idx)
    }

    /// Branch magnitudes `(θ⁺_1..θ⁺_n, θ⁻_1..θ⁻_n)`.
    pub fn branch_values(&self, n: u32) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut pos = Vec::with_capacity(n as usize);
        let mut neg = Vec::with_capacity(n as usize);
        for k in 1..=n {
            pos.push(self.eigenvalue(self.branch_index(Sign::Plus, k)?)?);
            neg.push(-self.eigenvalue(self.branch_index(Sign::Minus, k)?)?);
        }
        Ok((pos, neg))
    }

    fn spinor_from_reduced(&self, y: &[f64], lambda: f64) -> Spinor {
        let n = self.grid.intervals();
        let mut nodes = vec![0.0; n + 1];
        let mut halves = vec![0.0; n];
        for ((slot, m), v) in self.slots.iter().zip(&self.masses).zip(y) {
            match slot {
                Slot::Node(j) => nodes[*j] = v / m.sqrt(),
                Slot::Half(j) => halves[*j] = v / m.sqrt(),
            }
        }
        let (psi1, psi2) = if self.psi1_on_nodes {
            (nodes, halves)
        } else {
            (halves, nodes)
        };
        Spinor {
            psi1,
            psi2,
            psi1_on_nodes: self.psi1_on_nodes,
            lambda,
            params: self.params,
            grid: self.grid,
        }
    }

    fn reduced_from_spinor(&self, s: &Spinor) -> Vec<f64> {
        let (nodes, halves) = s.split();
        self.slots
            .iter()
            .zip(&self.masses)
            .map(|(slot, m)| match slot {
                Slot::Node(j) => nodes[*j] * m.sqrt(),
                Slot::Half(j) => halves[*j] * m.sqrt(),
            })
            .collect()
    }

    /// `‖(D − λ)Ψ‖` in the discrete L² norm, for a spinor on this grid.
    pub fn residual(&self, s: &Spinor, lambda: f64) -> f64 {
        let y = self.reduced_from_spinor(s);
        let ty = self.matrix.apply(&y);
        ty.iter()
            .zip(&y)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// The `k` eigenvalues closest to zero, ascending.
pub fn dirac_spectrum_window(fp: &FiberParams, g: &Grid, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("need k >= 1".into()));
    }
    let sys = assemble_dirac(fp, g)?;
    let dim = sys.dim();
    if k > dim {
        return Err(Error::Size { requested: k, dim });
    }
    let m0 = sys.count_below(0.0);
    let lo = m0.saturating_sub(k);
    let hi = (m0 + k).min(dim);
    let mut vals = (lo..hi)
        .map(|i| sys.eigenvalue(i))
        .collect::<Result<Vec<_>>>()?;
    vals.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    vals.truncate(k);
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// A discrete eigenspinor. The component on the integer grid has `N + 1`
/// samples (eliminated nodes hold 0), the other `N` half-node samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spinor {
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub psi1_on_nodes: bool,
    pub lambda: f64,
    pub params: FiberParams,
    pub grid: Grid,
}

impl Spinor {
    /// (integer-grid component, half-grid component)
    fn split(&self) -> (&[f64], &[f64]) {
        if self.psi1_on_nodes {
            (&self.psi1, &self.psi2)
        } else {
            (&self.psi2, &self.psi1)
        }
    }

    fn split_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<f64>) {
        if self.psi1_on_nodes {
            (&mut self.psi1, &mut self.psi2)
        } else {
            (&mut self.psi2, &mut self.psi1)
        }
    }

    pub fn norm(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.grid.intervals();
        let (nodes, halves) = self.split();
        let node_part: f64 = nodes
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 0 || j == n { 0.5 * h } else { h } * v * v)
            .sum();
        let half_part: f64 = halves.iter().map(|v| h * v * v).sum();
        (node_part + half_part).sqrt()
    }

    fn normalize(&mut self) {
        let norm = self.norm();
        let (nodes, halves) = self.split_mut();
        nodes.iter_mut().chain(halves.iter_mut()).for_each(|v| *v /= norm);
    }

    /// Boundary values `(ψ₁(0), ψ₂(0))`; half-grid values are extrapolated
    /// with second order.
    pub fn boundary_values(&self) -> (f64, f64) {
        let (nodes, halves) = self.split();
        let at_node = nodes[0];
        let at_half = 0.5 * (3.0 * halves[0] - halves[1]);
        if self.psi1_on_nodes {
            (at_node, at_half)
        } else {
            (at_half, at_node)
        }
    }

    /// Violation of the boundary condition relative to the spinor norm.
    pub fn boundary_residual(&self) -> f64 {
        let (p1, p2) = self.boundary_values();
        let r = match self.params.gamma.clamped() {
            Gamma::Infinite => p1.abs(),
            Gamma::Finite(g) => (p2 - g * p1).abs(),
        };
        r / self.norm()
    }
}

/// Spinor `(u, λ⁻¹ d†u)` built from a Robin eigenpair of the `+` family
/// (eigenvalue `+λ`), or `(−λ⁻¹ d u, u)` from the `−` family (eigenvalue
/// `−λ`). `lambda` is the positive branch magnitude θ.
///
/// Requires canonical parameters with `γ ∈ (0, ∞)`. The result is
/// renormalized; see [`DiracSystem::residual`] for the accuracy check.
pub fn reconstruct_spinor(e: &EigenPair, lambda: f64, fp: &FiberParams, g: &Grid) -> Result<Spinor> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("reconstruction needs lambda > 0, got {lambda}")));
    }
    let Problem::Robin(rp) = e.problem else {
        return Err(Error::Domain("reconstruction needs a Robin eigenpair".into()));
    };
    if !fp.is_canonical() || fp.gamma.is_zigzag() {
        return Err(Error::Domain("reconstruction needs b > 0 and 0 < gamma < inf".into()));
    }
    if e.grid != *g || e.samples.len() != g.intervals() + 1 {
        return Err(Error::InvalidParameter("eigenpair lives on a different grid".into()));
    }
    let n = g.intervals();
    let h = g.spacing();
    let u = &e.samples;
    let b = fp.b;
    let xi = fp.xi;
    let (psi1, psi2, value) = match rp.sign {
        Sign::Plus => {
            // ψ₂ at half nodes: (d†u)_{j+1/2} / λ
            let psi2 = (0..n)
                .map(|j| {
                    let m = xi + b * g.half_node(j);
                    ((u[j + 1] - u[j]) / h + 0.5 * m * (u[j] + u[j + 1])) / lambda
                })
                .collect();
            (u.clone(), psi2, lambda)
        }
        Sign::Minus => {
            // ψ₂ = u averaged onto half nodes, ψ₁ = −(d u)/λ on nodes
            let psi2 = (0..n).map(|j| 0.5 * (u[j] + u[j + 1])).collect();
            let du = |j: usize| -> f64 {
                if j == 0 {
                    (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
                } else if j == n {
                    (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h)
                } else {
                    (u[j + 1] - u[j - 1]) / (2.0 * h)
                }
            };
            let psi1 = (0..=n)
                .map(|j| -((xi + b * g.node(j)) * u[j] - du(j)) / lambda)
                .collect();
            (psi1, psi2, -lambda)
        }
    };
    let mut s = Spinor {
        psi1,
        psi2,
        psi1_on_nodes: true,
        lambda: value,
        params: *fp,
        grid: *g,
    };
    s.normalize();
    Ok(s)
}

/// `λ′(ξ) = ⟨Ψ, σ₁Ψ⟩ = 2⟨ψ₁, ψ₂⟩`, with the integer-grid component averaged
/// onto half nodes.
pub fn feynman_hellmann_velocity(s: &Spinor) -> f64 {
    let h = s.grid.spacing();
    let (nodes, halves) = s.split();
    let overlap: f64 = halves
        .iter()
        .enumerate()
        .map(|(j, v)| h * v * 0.5 * (nodes[j] + nodes[j + 1]))
        .sum();
    2.0 * overlap / s.norm().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{auto_grid, default_spacing, make_grid};

    fn fp(b: f64, g: Gamma, xi: f64) -> FiberParams {
        FiberParams::new(b, g, xi).unwrap()
    }

    #[test]
    fn dense_copy_is_symmetric() {
        let g = make_grid(6.0, 30).unwrap();
        for gamma in [Gamma::Finite(0.0), Gamma::Finite(0.7), Gamma::Infinite, Gamma::Finite(-2.0)] {
            for b in [1.0, -1.0] {
                let sys = assemble_dirac(&fp(b, gamma, 0.3), &g).unwrap();
                let m = sys.to_dense();
                for i in 0..m.len() {
                    for j in 0..m.len() {
                        assert_eq!(m[i][j].to_bits(), m[j][i].to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_mode_only_for_gamma_zero() {
        let g = auto_grid(1.0, 0.0, 1, default_spacing(1.0));
        let w = dirac_spectrum_window(&fp(1.0, Gamma::Finite(0.0), 0.0), &g, 1).unwrap();
        assert!(w[0].abs() < 1e-6, "{w:?}");
        let w = dirac_spectrum_window(&fp(1.0, Gamma::Finite(1.0), 0.0), &g, 1).unwrap();
        assert!(w[0].abs() > 0.3, "{w:?}");
    }

    #[test]
    fn zigzag_infinity_levels() {
        let g = auto_grid(1.0, 0.0, 2, default_spacing(1.0));
        let sys = assemble_dirac(&fp(1.0, Gamma::Infinite, 0.0), &g).unwrap();
        let (pos, neg) = sys.branch_values(2).unwrap();
        assert!((pos[0] - 2f64.sqrt()).abs() < 2e-3);
        assert!((pos[1] - 6f64.sqrt()).abs() < 2e-3);
        for (p, n) in pos.iter().zip(&neg) {
            assert!((p - n).abs() < 1e-6);
        }
    }

    #[test]
    fn zigzag_zero_symmetric() {
        let g = auto_grid(1.0, -2.0, 2, default_spacing(1.0));
        let w = dirac_spectrum_window(&fp(1.0, Gamma::Finite(0.0), -1.3), &g, 7).unwrap();
        for k in 0..7 {
            assert!((w[k] + w[6 - k]).abs() < 1e-6, "{w:?}");
        }
    }

    #[test]
    fn sigma3_maps_gamma_sign() {
        let g = auto_grid(1.0, 0.0, 2, default_spacing(1.0));
        let a = dirac_spectrum_window(&fp(1.0, Gamma::Finite(1.7), 0.4), &g, 6).unwrap();
        let b = dirac_spectrum_window(&fp(1.0, Gamma::Finite(-1.7), 0.4), &g, 6).unwrap();
        for (x, y) in a.iter().zip(b.iter().rev()) {
            assert!((x + y).abs() < 1e-9);
        }
    }

    #[test]
    fn reconstruct_rejects_bad_lambda() {
        let g = make_grid(8.0, 80).unwrap();
        let p = crate::schrodinger::RobinFiberParams::new(Sign::Plus, 1.0, 1.0, 0.0).unwrap();
        let e = crate::schrodinger::nu(&p, 1, &g).unwrap();
        let f = fp(1.0, Gamma::Finite(1.0), 0.0);
        assert!(matches!(reconstruct_spinor(&e, 0.0, &f, &g), Err(Error::Domain(_))));
        assert!(matches!(reconstruct_spinor(&e, -1.0, &f, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn flat_band_velocity_vanishes() {
        let g = auto_grid(1.0, -1.0, 1, default_spacing(1.0));
        for xi in [-1.0, 0.0, 1.5] {
            let sys = assemble_dirac(&fp(1.0, Gamma::Finite(0.0), xi), &g).unwrap();
            let s = sys.branch_spinor(Sign::Plus, 1).unwrap();
            assert!(s.lambda.abs() < 1e-6);
            assert!(feynman_hellmann_velocity(&s).abs() < 1e-6);
        }
    }
}
