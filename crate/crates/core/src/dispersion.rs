//! Dispersion curves `θ±_n(γ, ξ)`.
//!
//! For `γ ∈ (0, ∞)` the branch magnitude is the unique positive root of
//!
//! ```text
//! f(λ) = ν^±_n(c·λ, ξ) − λ²,     c = γ (+ branches), c = 1/γ (− branches)
//! ```
//!
//! solved by safeguarded Newton with `f′(λ) = c·u(0)² − 2λ`. The zigzag cases
//! `γ ∈ {0, ∞}` use the Dirichlet closed forms. Requests with `b < 0` or
//! `γ < 0` are mapped to `b > 0, γ ≥ 0` by [`canonicalize`].
//!
//! For `(+, 1)` the exact value `ν⁺_1(0, ξ) = 0` is used to remove the
//! discretization offset of the Robin eigenvalue, so that the exponentially
//! small part of the curve at `ξ → −∞` stays positive and increasing.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{auto_grid, default_spacing, Grid};
use crate::params::{Branch, FiberParams, Gamma, Sign};
use crate::schrodinger::{self, EigenPair, Problem, RobinFiberParams};
use crate::tridiag::{self, Hint};

/// Relative residual target of the fixed-point solve.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Below this estimate the deflated `(+, 1)` root is taken from the
/// two-point Feynman–Hellmann quadrature instead of Newton.
const SMALL_THETA: f64 = 1e-3;
const MAX_DOUBLINGS: u32 = 6;
const MAX_NEWTON: usize = 100;

/// Numerical settings shared by every solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Grid spacing; `None` selects [`default_spacing`] for the given `b`.
    pub spacing: Option<f64>,
    /// `ξ → −∞` is realized at `ξ = −far_left·√|b|`.
    pub far_left: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            spacing: None,
            far_left: 8.0,
        }
    }
}

impl SolverConfig {
    pub fn with_spacing(spacing: f64) -> Self {
        Self {
            spacing: Some(spacing),
            ..Self::default()
        }
    }

    pub fn spacing_for(&self, b: f64) -> f64 {
        self.spacing.unwrap_or_else(|| default_spacing(b))
    }

    /// Grid resolving branch index `n` at momentum `xi`.
    pub fn grid(&self, b: f64, xi: f64, n: u32) -> Grid {
        auto_grid(b, xi, n as usize + 1, self.spacing_for(b))
    }

    pub fn minus_infinity(&self, b: f64) -> f64 {
        -self.far_left * b.abs().sqrt()
    }
}

/// Record of the symmetry map from a requested problem to its canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymmetryTransform {
    pub negate_spectrum: bool,
    pub reflect_xi: bool,
    pub invert_gamma: bool,
    pub flip_branch_sign: bool,
}

impl SymmetryTransform {
    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }

    /// Canonical branch answering the requested one.
    pub fn branch(&self, br: Branch) -> Branch {
        if self.flip_branch_sign {
            br.flip()
        } else {
            br
        }
    }

    /// Canonical momentum for a requested one.
    pub fn xi(&self, xi: f64) -> f64 {
        if self.reflect_xi {
            -xi
        } else {
            xi
        }
    }

    /// Requested eigenvalue from a canonical one.
    pub fn value(&self, lambda: f64) -> f64 {
        if self.negate_spectrum {
            -lambda
        } else {
            lambda
        }
    }

    /// Requested `dλ/dξ` from a canonical one.
    pub fn slope(&self, slope: f64) -> f64 {
        let s = if self.negate_spectrum { -slope } else { slope };
        if self.reflect_xi {
            -s
        } else {
            s
        }
    }

    /// Requested limit at `ξ → −∞` given canonical limits at `∓∞`.
    pub fn limit(&self, canonical_minus: Limit, canonical_plus: Limit) -> Limit {
        let l = if self.reflect_xi { canonical_plus } else { canonical_minus };
        if self.negate_spectrum {
            l.negate()
        } else {
            l
        }
    }
}

/// Map `fp` to `b > 0`, `γ ∈ [0, ∞]`.
///
/// `b < 0` uses charge conjugation `(b, γ, ξ) → (−b, 1/γ, −ξ)`, and `γ < 0`
/// uses `γ → −γ`; each negates the spectrum.
pub fn canonicalize(fp: &FiberParams) -> Result<(FiberParams, SymmetryTransform)> {
    let fp = FiberParams::new(fp.b, fp.gamma, fp.xi)?;
    let mut t = SymmetryTransform::default();
    let (mut b, mut gamma, mut xi) = (fp.b, fp.gamma.clamped(), fp.xi);
    if b < 0.0 {
        b = -b;
        xi = -xi;
        gamma = gamma.inverse();
        t.negate_spectrum = !t.negate_spectrum;
        t.reflect_xi = true;
        t.invert_gamma = true;
    }
    if let Gamma::Finite(g) = gamma {
        if g < 0.0 {
            gamma = Gamma::Finite(-g);
            t.negate_spectrum = !t.negate_spectrum;
        }
    }
    t.flip_branch_sign = t.negate_spectrum;
    Ok((FiberParams::new(b, gamma, xi)?, t))
}

/// A branch limit at `ξ → ±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    PlusInf,
    MinusInf,
}

impl Limit {
    pub fn negate(self) -> Self {
        match self {
            Limit::Finite(v) => Limit::Finite(0.0 - v),
            Limit::PlusInf => Limit::MinusInf,
            Limit::MinusInf => Limit::PlusInf,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl Serialize for Limit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Limit::Finite(v) => s.serialize_f64(*v),
            Limit::PlusInf => s.serialize_str("inf"),
            Limit::MinusInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Limit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Limit::Finite(v)),
            Repr::Text(s) => match s.as_str() {
                "inf" | "+inf" => Ok(Limit::PlusInf),
                "-inf" => Ok(Limit::MinusInf),
                _ => Err(serde::de::Error::custom(format!("bad limit `{s}`"))),
            },
        }
    }
}

/// Catalog value of `lim_{ξ→−∞} λ` for a canonical problem.
pub fn asymptotic_limit(br: Branch, gamma: Gamma, b: f64) -> Limit {
    let level = |k: u32| (2.0 * k as f64 * b).sqrt();
    let n = br.n;
    let magnitude = match (gamma.clamped(), br.sign) {
        (Gamma::Infinite, _) => level(n - 1),
        (_, Sign::Plus) => level(n - 1),
        (_, Sign::Minus) => level(n),
    };
    Limit::Finite(br.sign.factor() * magnitude)
}

/// `lim_{ξ→+∞} λ` for a canonical problem: every curve escapes except the
/// flat zigzag band.
pub fn asymptotic_limit_plus(br: Branch, gamma: Gamma) -> Limit {
    let flat = gamma.clamped() == Gamma::Finite(0.0) && br == Branch::plus(1);
    match (flat, br.sign) {
        (true, _) => Limit::Finite(0.0),
        (false, Sign::Plus) => Limit::PlusInf,
        (false, Sign::Minus) => Limit::MinusInf,
    }
}

/// Limits `(ξ → −∞, ξ → +∞)` of a requested branch for any `(b, γ)`.
pub fn branch_limits(br: Branch, gamma: Gamma, b: f64) -> Result<(Limit, Limit)> {
    let (can, t) = canonicalize(&FiberParams::new(b, gamma, 0.0)?)?;
    let cb = t.branch(br);
    let minus = asymptotic_limit(cb, can.gamma, can.b);
    let plus = asymptotic_limit_plus(cb, can.gamma);
    let left = t.limit(minus, plus);
    let right = t.limit(plus, minus);
    Ok((left, right))
}

/// Solution of one canonical branch at one momentum.
#[derive(Debug, Clone)]
pub struct BranchSolution {
    /// Branch magnitude θ ≥ 0.
    pub theta: f64,
    /// Robin pair at `α = c·θ`, Dirichlet pair for zigzag, `None` for the
    /// flat band.
    pub pair: Option<EigenPair>,
}

fn check_canonical(fp: &FiberParams) -> Result<()> {
    if !fp.is_canonical() {
        return Err(Error::InvalidParameter(format!(
            "expected b > 0 and gamma >= 0, got b={}, gamma={}",
            fp.b, fp.gamma
        )));
    }
    Ok(())
}

/// Robin coupling `c` of a branch for finite nonzero γ.
fn coupling(sign: Sign, gamma: f64) -> f64 {
    match sign {
        Sign::Plus => gamma,
        Sign::Minus => 1.0 / gamma,
    }
}

/// Branch magnitude θ for canonical parameters.
pub fn theta(br: Branch, fp: &FiberParams, g: &Grid) -> Result<f64> {
    solve_branch(br, fp, g).map(|s| s.theta)
}

/// Raw fixed-point function `ν^±_n(c·λ, ξ) − λ²` (no offset removal).
pub fn fixed_point_function(br: Branch, fp: &FiberParams, g: &Grid, lambda: f64) -> Result<f64> {
    check_canonical(fp)?;
    let Gamma::Finite(gamma) = fp.gamma.clamped() else {
        return Err(Error::Domain("fixed point needs finite gamma".into()));
    };
    if gamma == 0.0 {
        return Err(Error::Domain("fixed point needs gamma > 0".into()));
    }
    let c = coupling(br.sign, gamma);
    let p = RobinFiberParams::new(br.sign, fp.b, c * lambda, fp.xi)?;
    Ok(schrodinger::nu(&p, br.n, g)?.nu - lambda * lambda)
}

pub fn solve_branch(br: Branch, fp: &FiberParams, g: &Grid) -> Result<BranchSolution> {
    solve_branch_from(br, fp, g, None)
}

/// As [`solve_branch`], starting from an estimate of θ (for example the
/// value at a neighbouring momentum).
pub fn solve_branch_from(
    br: Branch,
    fp: &FiberParams,
    g: &Grid,
    guess: Option<f64>,
) -> Result<BranchSolution> {
    check_canonical(fp)?;
    let dirichlet = |index: u32, shift: f64| {
        let hint = guess.map(|t| Hint::new(t * t + shift));
        schrodinger::nu_dirichlet_with(fp.b, fp.xi, index, g, hint)
    };
    match fp.gamma.clamped() {
        Gamma::Infinite => {
            let e = dirichlet(br.n, 2.0 * fp.b)?;
            let theta = (e.nu - 2.0 * fp.b).max(0.0).sqrt();
            Ok(BranchSolution { theta, pair: Some(e) })
        }
        Gamma::Finite(z) if z == 0.0 => {
            let index = match br.sign {
                Sign::Plus if br.n == 1 => {
                    return Ok(BranchSolution { theta: 0.0, pair: None });
                }
                Sign::Plus => br.n - 1,
                Sign::Minus => br.n,
            };
            let e = dirichlet(index, 0.0)?;
            Ok(BranchSolution {
                theta: e.nu.max(0.0).sqrt(),
                pair: Some(e),
            })
        }
        Gamma::Finite(gamma) => FixedPoint::new(br, fp, gamma, g).solve(guess),
    }
}

struct FixedPoint<'a> {
    br: Branch,
    b: f64,
    xi: f64,
    c: f64,
    g: &'a Grid,
    /// subtracted from ν; nonzero only for (+, 1)
    offset: f64,
}

/// One evaluation of the fixed-point function.
struct Eval {
    x: f64,
    f: f64,
    pair: EigenPair,
    /// relative eigenvalue tolerance used
    tol: f64,
}

impl<'a> FixedPoint<'a> {
    fn new(br: Branch, fp: &FiberParams, gamma: f64, g: &'a Grid) -> Self {
        Self {
            br,
            b: fp.b,
            xi: fp.xi,
            c: coupling(br.sign, gamma),
            g,
            offset: 0.0,
        }
    }

    fn pair(&self, lambda: f64, hint: Option<Hint>, tol: f64) -> Result<EigenPair> {
        self.pair_from(lambda, hint, None, tol)
    }

    fn pair_from(
        &self,
        lambda: f64,
        hint: Option<Hint>,
        start: Option<&EigenPair>,
        tol: f64,
    ) -> Result<EigenPair> {
        let p = RobinFiberParams::new(self.br.sign, self.b, self.c * lambda, self.xi)?;
        schrodinger::nu_with(&p, self.br.n, self.g, hint, start, tol)
    }

    /// Evaluate at `x`, predicting ν from a previous evaluation when given.
    fn eval(&self, x: f64, prev: Option<&Eval>, tol: f64) -> Result<Eval> {
        let hint = match prev {
            Some(p) => {
                let du = p.pair.u0 * p.pair.u0;
                let center = p.pair.nu + self.c * du * (x - p.x);
                let width = 1e-2 * p.f.abs() + 1e-3 * (x - p.x).abs() * (1.0 + center.abs());
                Hint { center, width }
            }
            None => Hint::new(x * x + self.offset),
        };
        let pair = self.pair_from(x, Some(hint), prev.map(|p| &p.pair), tol)?;
        Ok(Eval {
            x,
            f: pair.nu - self.offset - x * x,
            pair,
            tol,
        })
    }

    fn done(&self, e: &Eval) -> bool {
        e.tol <= tridiag::DEFAULT_TOL && e.f.abs() <= FIXED_POINT_TOL * (1.0 + e.x * e.x)
    }

    /// Safeguarded Newton from `guess` (or from the initial cap `Λ₀`).
    ///
    /// The bracket starts as `[0, ?]`; `f(0) >= 0` holds for every branch
    /// (after offset removal for `(+, 1)`). While no upper end is known the
    /// iterate moves right by Newton steps or by doubling, at most
    /// [`MAX_DOUBLINGS`] times and never beyond `Λ_max`.
    fn solve(mut self, guess: Option<f64>) -> Result<BranchSolution> {
        if self.br == Branch::plus(1) {
            let e0 = self.pair(0.0, Some(Hint::new(0.0)), tridiag::DEFAULT_TOL)?;
            self.offset = e0.nu;
            if self.c * e0.u0 * e0.u0 < SMALL_THETA {
                return self.small_root(&e0);
            }
        }

        let n = self.br.n as f64;
        let cap = 10.0 * (2.0 * (n + 2.0) * self.b).sqrt();
        let initial = (2.0 * (n + 1.0) * self.b).sqrt() + 1.0;
        let loose = 1e-6;
        let x0 = guess.filter(|g| g.is_finite() && *g > 0.0).map_or(initial, |g| g.min(cap));
        let mut lo = 0.0;
        let mut hi: Option<f64> = None;
        let mut doublings = 0;
        let mut cur = self.eval(x0, None, loose)?;

        for _ in 0..MAX_NEWTON {
            if self.done(&cur) {
                return Ok(BranchSolution { theta: cur.x, pair: Some(cur.pair) });
            }
            if cur.f > 0.0 {
                lo = cur.x;
            } else {
                hi = Some(cur.x);
            }
            let slope = self.c * cur.pair.u0 * cur.pair.u0 - 2.0 * cur.x;
            let newton = cur.x - cur.f / slope;
            let mut collapsed = false;
            let x = match hi {
                Some(h) => {
                    collapsed = h - lo <= 4.0 * f64::EPSILON * (1.0 + h);
                    if collapsed {
                        cur.x
                    } else if slope < 0.0 && newton > lo && newton < h {
                        newton
                    } else {
                        0.5 * (lo + h)
                    }
                }
                None => {
                    if cur.x >= cap {
                        return Err(Error::Bracket(format!(
                            "fixed point for branch {} not bracketed below {cap}",
                            self.br
                        )));
                    }
                    if slope < 0.0 && newton > cur.x && newton <= 2.0 * cur.x.max(initial) {
                        newton.min(cap)
                    } else {
                        if doublings == MAX_DOUBLINGS {
                            return Err(Error::Bracket(format!(
                                "fixed point for branch {} not bracketed after {MAX_DOUBLINGS} doublings",
                                self.br
                            )));
                        }
                        doublings += 1;
                        (2.0 * cur.x.max(initial / 2.0)).min(cap)
                    }
                }
            };
            // tighten the eigenvalue tolerance as the residual shrinks
            let tol = if collapsed {
                tridiag::DEFAULT_TOL
            } else {
                (1e-4 * cur.f.abs() / (1.0 + x * x)).clamp(tridiag::DEFAULT_TOL, loose)
            };
            let next = self.eval(x, Some(&cur), tol)?;
            if collapsed {
                return Ok(BranchSolution { theta: next.x, pair: Some(next.pair) });
            }
            cur = next;
        }
        Err(Error::Convergence(MAX_NEWTON))
    }

    /// Root of `ν(cλ) − ν(0) = λ²` for tiny λ, where `ν(cλ) − ν(0)` is the
    /// integral of `u(0)²` over `α ∈ [0, cλ]`, taken by the trapezoid rule.
    fn small_root(&self, e0: &EigenPair) -> Result<BranchSolution> {
        let w0 = e0.u0 * e0.u0;
        let tol = tridiag::DEFAULT_TOL;
        let hint = |lambda: f64| Hint {
            center: self.offset + self.c * lambda * w0,
            width: (self.c * lambda * w0).max(1e-12),
        };
        let mut lambda = self.c * w0;
        let mut e = self.pair_from(lambda, Some(hint(lambda)), Some(e0), tol)?;
        for _ in 0..4 {
            let next = 0.5 * self.c * (w0 + e.u0 * e.u0);
            if (next - lambda).abs() <= 1e-12 * lambda {
                break;
            }
            lambda = next;
            e = self.pair_from(lambda, Some(hint(lambda)), Some(&e), tol)?;
        }
        Ok(BranchSolution { theta: lambda, pair: Some(e) })
    }
}

/// Signed slope `λ′(ξ)` of a canonical branch at its solution.
///
/// Uses `θ′ = −∂_ξν / (c·∂_αν − 2θ)` for Robin pairs, with `ν = θ²` from
/// the fixed point, and `θ′ = ∂_ξν^Dir / (2θ)` for zigzag pairs.
pub fn curve_slope(br: Branch, fp: &FiberParams, theta: f64, e: Option<&EigenPair>) -> Result<f64> {
    check_canonical(fp)?;
    let Some(e) = e else {
        return Ok(0.0);
    };
    let magnitude = match e.problem {
        Problem::Dirichlet { .. } => {
            if theta == 0.0 {
                0.0
            } else {
                schrodinger::dirichlet_partial_xi(e)? / (2.0 * theta)
            }
        }
        Problem::Robin(p) => {
            let Gamma::Finite(gamma) = fp.gamma.clamped() else {
                return Err(Error::Domain("Robin pair with infinite gamma".into()));
            };
            let c = coupling(br.sign, gamma);
            let denom = c * schrodinger::nu_partial_alpha(e)? - 2.0 * theta;
            if !(denom < 0.0) {
                return Err(Error::Invariant(format!(
                    "slope denominator {denom:e} >= 0 on branch {br} at xi = {}",
                    p.xi
                )));
            }
            -schrodinger::xi_derivative(&p, theta * theta, e.u0) / denom
        }
    };
    Ok(br.sign.factor() * magnitude)
}

/// One requested point of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Branch magnitude of the canonical problem.
    pub theta: f64,
    /// Signed eigenvalue of the requested problem.
    pub lambda: f64,
    /// `dλ/dξ` of the requested problem.
    pub slope: f64,
}

/// Value and slope of branch `br` for any `(b, γ, ξ)`.
pub fn evaluate(br: Branch, fp: &FiberParams, cfg: &SolverConfig) -> Result<CurvePoint> {
    evaluate_from(br, fp, cfg, None)
}

/// As [`evaluate`], with an estimate of θ to start from.
pub fn evaluate_from(
    br: Branch,
    fp: &FiberParams,
    cfg: &SolverConfig,
    guess: Option<f64>,
) -> Result<CurvePoint> {
    let (can, t) = canonicalize(fp)?;
    let cb = t.branch(br);
    let g = cfg.grid(can.b, can.xi, cb.n);
    let run = || -> Result<CurvePoint> {
        let sol = solve_branch_from(cb, &can, &g, guess)?;
        let slope = curve_slope(cb, &can, sol.theta, sol.pair.as_ref())?;
        Ok(CurvePoint {
            theta: sol.theta,
            lambda: t.value(cb.sign.factor() * sol.theta),
            slope: t.slope(slope),
        })
    };
    run().map_err(|e| e.at(fp.xi, br))
}

/// Sampled dispersion curve of a requested branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionCurve {
    pub branch: Branch,
    pub gamma: Gamma,
    pub b: f64,
    pub xis: Vec<f64>,
    /// Magnitudes; the branch sign is applied by [`DispersionCurve::lambda`].
    pub thetas: Vec<f64>,
    /// Signed `dλ/dξ`.
    pub slopes: Vec<f64>,
    pub limit_minus_inf: Limit,
    pub transform: SymmetryTransform,
}

impl DispersionCurve {
    pub fn len(&self) -> usize {
        self.xis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xis.is_empty()
    }

    pub fn lambda(&self, i: usize) -> f64 {
        // adding 0.0 turns -0.0 into 0.0
        self.branch.sign.factor() * self.thetas[i] + 0.0
    }

    pub fn lambdas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.lambda(i)).collect()
    }
}

/// `steps` equispaced momenta from `xi_min` to `xi_max` inclusive.
pub fn linspace(xi_min: f64, xi_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(xi_min.is_finite() && xi_max.is_finite() && xi_min < xi_max) {
        return Err(Error::InvalidParameter(format!(
            "need xi_min < xi_max, got {xi_min}..{xi_max}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need steps >= 2, got {steps}")));
    }
    let d = (xi_max - xi_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { xi_max } else { xi_min + i as f64 * d })
        .collect())
}

/// Sample `branches` of `D_γ(b)` on `steps` momenta in `[xi_min, xi_max]`.
///
/// Samples are solved independently and in parallel, then assembled in
/// (branch, ξ) order, so the result does not depend on the thread count.
pub fn sweep(
    gamma: Gamma,
    b: f64,
    xi_min: f64,
    xi_max: f64,
    steps: usize,
    branches: &[Branch],
    cfg: &SolverConfig,
) -> Result<Vec<DispersionCurve>> {
    sweep_at(gamma, b, &linspace(xi_min, xi_max, steps)?, branches, cfg)
}

/// As [`sweep`] on explicit momenta.
pub fn sweep_at(
    gamma: Gamma,
    b: f64,
    xis: &[f64],
    branches: &[Branch],
    cfg: &SolverConfig,
) -> Result<Vec<DispersionCurve>> {
    if branches.is_empty() {
        return Err(Error::InvalidParameter("no branches requested".into()));
    }
    let (_, transform) = canonicalize(&FiberParams::new(b, gamma, 0.0)?)?;
    let chunks: Vec<(usize, &[f64])> = (0..branches.len())
        .flat_map(|k| xis.chunks(SWEEP_CHUNK).map(move |c| (k, c)))
        .collect();
    let pieces = chunks
        .par_iter()
        .map(|&(k, c)| trace_branch(branches[k], gamma, b, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<CurvePoint> = pieces.into_iter().flatten().collect();
    let mut curves = Vec::with_capacity(branches.len());
    for (k, &br) in branches.iter().enumerate() {
        let chunk = &points[k * xis.len()..(k + 1) * xis.len()];
        curves.push(DispersionCurve {
            branch: br,
            gamma,
            b,
            xis: xis.to_vec(),
            thetas: chunk.iter().map(|p| br.sign.factor() * p.lambda).collect(),
            slopes: chunk.iter().map(|p| p.slope).collect(),
            limit_minus_inf: branch_limits(br, gamma, b)?.0,
            transform,
        });
    }
    Ok(curves)
}

/// Samples per warm-started stretch of a sweep. Each stretch starts cold, so
/// the work split, and with it every output bit, is fixed by this constant
/// rather than by the thread count.
pub const SWEEP_CHUNK: usize = 32;

/// Evaluate one branch along `xis` in order, each solve starting from the
/// linear extrapolation of the previous sample.
pub fn trace_branch(
    br: Branch,
    gamma: Gamma,
    b: f64,
    xis: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<CurvePoint>> {
    let mut out: Vec<CurvePoint> = Vec::with_capacity(xis.len());
    let mut prev: Option<(f64, CurvePoint)> = None;
    for &xi in xis {
        let guess = prev.map(|(x0, p)| {
            let theta_slope = br.sign.factor() * p.slope;
            let g = p.theta + theta_slope * (xi - x0);
            if g > 0.0 {
                g
            } else {
                p.theta
            }
        });
        let p = evaluate_from(br, &FiberParams::new(b, gamma, xi)?, cfg, guess)?;
        prev = Some((xi, p));
        out.push(p);
    }
    Ok(out)
}

/// Minimizer of `θ⁻_n(γ, ·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub gamma: f64,
    pub b: f64,
    pub n: u32,
    pub xi: f64,
    pub theta: f64,
    pub slope: f64,
}

/// Slope magnitude accepted at the critical point.
pub const CRITICAL_SLOPE_TOL: f64 = 1e-8;

/// Locate the unique minimizer of `θ⁻_n(γ, ·)` for `γ ∈ (0, ∞)`, `b > 0`.
///
/// For small γ the minimizer moves far left, where the curve is flat to
/// machine precision; the bracket ends must have slopes above
/// [`CRITICAL_SLOPE_TOL`], otherwise a bracket error is returned.
pub fn critical_point(gamma: f64, b: f64, n: u32, cfg: &SolverConfig) -> Result<CriticalPoint> {
    if !(gamma.is_finite() && gamma > 0.0 && Gamma::Finite(gamma).clamped() == Gamma::Finite(gamma)) {
        return Err(Error::InvalidParameter(format!(
            "critical point needs 0 < gamma < inf, got {gamma}"
        )));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("critical point needs b > 0, got {b}")));
    }
    let br = Branch::minus(n);
    let at = |xi: f64| -> Result<CurvePoint> {
        evaluate(br, &FiberParams::new(b, Gamma::Finite(gamma), xi)?, cfg)
    };
    // θ⁻ = −λ, so the magnitude decreases (λ′ > 0) left of the minimizer
    let root_b = b.sqrt();
    let limit = 20.0 * root_b;
    let mut width = root_b;
    let (mut lo, mut hi) = loop {
        let (l, h) = (-width, width);
        let (pl, ph) = (at(l)?, at(h)?);
        if pl.slope > CRITICAL_SLOPE_TOL && ph.slope < -CRITICAL_SLOPE_TOL {
            break ((l, pl), (h, ph));
        }
        if width >= limit {
            return Err(Error::Bracket(format!(
                "no resolvable slope sign change of branch {br} within |xi| <= {limit}"
            )));
        }
        width = (2.0 * width).min(limit);
    };
    for _ in 0..200 {
        let best = if lo.1.slope.abs() < hi.1.slope.abs() { lo } else { hi };
        if best.1.slope.abs() <= CRITICAL_SLOPE_TOL || hi.0 - lo.0 <= 1e-14 * (1.0 + hi.0.abs()) {
            return Ok(CriticalPoint {
                gamma,
                b,
                n,
                xi: best.0,
                theta: best.1.theta,
                slope: best.1.slope,
            });
        }
        // regula falsi step, kept away from the ends
        let t = (lo.1.slope / (lo.1.slope - hi.1.slope)).clamp(0.1, 0.9);
        let mid = lo.0 + t * (hi.0 - lo.0);
        let pm = at(mid)?;
        if pm.slope > 0.0 {
            lo = (mid, pm);
        } else {
            hi = (mid, pm);
        }
    }
    Err(Error::Convergence(200))
}

/// One row of the gap profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub gamma: Gamma,
    /// `−min_ξ θ⁻_1(γ, ξ)`.
    pub max_negative_energy: f64,
    /// Location of the minimum, if attained at a critical point.
    pub xi_star: Option<f64>,
}

/// Maximal negative energy `−min_ξ θ⁻_1(γ, ·)` for each γ (b > 0).
///
/// Zigzag values, and those of small γ whose minimizer lies where the curve
/// is numerically flat, are sampled minima over `[−far_left·√b, 0]`.
pub fn gap_profile(b: f64, gammas: &[Gamma], cfg: &SolverConfig) -> Result<Vec<GapRow>> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("gap profile needs b > 0, got {b}")));
    }
    gammas
        .par_iter()
        .map(|&gamma| match gamma.clamped() {
            Gamma::Finite(g) if g < 0.0 => Err(Error::InvalidParameter(format!(
                "gap profile needs gamma >= 0, got {g}"
            ))),
            Gamma::Finite(g) if g > 0.0 => match critical_point(g, b, 1, cfg) {
                Ok(cp) => Ok(GapRow {
                    gamma,
                    max_negative_energy: -cp.theta,
                    xi_star: Some(cp.xi),
                }),
                Err(Error::Bracket(_)) => sampled_gap(gamma, b, cfg),
                Err(e) => Err(e),
            },
            zigzag => sampled_gap(zigzag, b, cfg),
        })
        .collect()
}

/// Gap row from the sampled minimum over `[−far_left·√b, 0]`.
fn sampled_gap(gamma: Gamma, b: f64, cfg: &SolverConfig) -> Result<GapRow> {
    let mut best = f64::INFINITY;
    for xi in linspace(cfg.minus_infinity(b), 0.0, 33)? {
        let p = evaluate(Branch::minus(1), &FiberParams::new(b, gamma, xi)?, cfg)?;
        best = best.min(p.theta);
    }
    Ok(GapRow {
        gamma,
        max_negative_energy: -best,
        xi_star: None,
    })
}
