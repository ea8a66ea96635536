//! Edge Hall conductance from the dispersion curves.
//!
//! With a window `F ∈ C²` equal to 1 near the selected Landau levels and 0
//! near the others, the conductance is
//!
//! ```text
//! Σ_j F(λ_j(−∞)) − F(λ_j(+∞))   =   −Σ_j ∫ F′(λ_j(ξ)) λ′_j(ξ) dξ
//! ```
//!
//! The left side is evaluated from the limit catalog and is an exact integer.
//! The right side is a trapezoid quadrature over sampled curves and serves as
//! a numerical check.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{self, branch_limits, CurvePoint, Limit, SolverConfig, SymmetryTransform};
use crate::error::{Error, Result};
use crate::params::{Branch, FiberParams, Gamma};

/// Fine quadrature step in units of `1/√|b|`.
pub const FINE_STEP: f64 = 0.005;
/// Coarse cells span this many fine steps.
pub const REFINE_FACTOR: i64 = 20;
/// Default integration half-width in units of `√|b|`.
pub const DEFAULT_XI_SCALE: f64 = 10.0;

/// Energy of Landau level `k`: `sign(k)·√(2|k||b|)`.
pub fn level_energy(k: i64, b: f64) -> f64 {
    (k.signum() as f64) * (2.0 * k.unsigned_abs() as f64 * b.abs()).sqrt()
}

/// Landau levels `sign(k)·√(2|k||b|)` for `|k| <= k_max`, ascending.
pub fn landau_levels(b: f64, k_max: u32) -> Vec<f64> {
    let k = k_max as i64;
    (-k..=k).map(|k| level_energy(k, b)).collect()
}

/// Half the distance from level `k` to the next level away from zero.
fn outer_half_gap(k: i64, b: f64) -> f64 {
    let m = k.unsigned_abs() as f64;
    let b = b.abs();
    ((2.0 * (m + 1.0) * b).sqrt() - (2.0 * m * b).sqrt()) / 2.0
}

/// Selected Landau levels with the bump half-width δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelWindow {
    pub b: f64,
    /// Sorted, distinct signed level indices.
    pub selected: Vec<i64>,
    pub delta: f64,
}

impl LevelWindow {
    /// Validated window; `delta = None` selects [`LevelWindow::default_delta`].
    pub fn new(b: f64, selected: &[i64], delta: Option<f64>) -> Result<Self> {
        if !(b.is_finite() && b != 0.0) {
            return Err(Error::Window(format!("b must be finite and nonzero, got {b}")));
        }
        let mut selected = selected.to_vec();
        selected.sort_unstable();
        selected.dedup();
        if selected.is_empty() {
            return Err(Error::Window("no levels selected".into()));
        }
        let delta = delta.unwrap_or_else(|| Self::default_delta(b, &selected));
        let w = Self { b, selected, delta };
        w.validate()?;
        Ok(w)
    }

    /// `min(0.3·√|b|, 0.9·h)` with `h` the smallest outer half-gap among the
    /// selected levels.
    pub fn default_delta(b: f64, selected: &[i64]) -> f64 {
        let gap = selected
            .iter()
            .map(|&k| outer_half_gap(k, b))
            .fold(f64::INFINITY, f64::min);
        (0.3 * b.abs().sqrt()).min(0.9 * gap)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Window(format!("delta must be positive, got {}", self.delta)));
        }
        if self.selected.is_empty() {
            return Err(Error::Window("no levels selected".into()));
        }
        for &k in &self.selected {
            let bound = outer_half_gap(k, self.b);
            if self.delta >= bound {
                return Err(Error::Window(format!(
                    "delta {} must be below {bound} for level {k}",
                    self.delta
                )));
            }
        }
        Ok(())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.selected.iter().map(|&k| level_energy(k, self.b)).collect()
    }

    /// Same levels with a new δ.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.b, &self.selected, Some(delta))
    }
}

/// Quintic smoothstep `6s⁵ − 15s⁴ + 10s³` on `[0, 1]`.
fn smoothstep(s: f64) -> f64 {
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

fn smoothstep_prime(s: f64) -> f64 {
    30.0 * s * s * (1.0 - s) * (1.0 - s)
}

/// Window function built from one bump per selected level.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    centers: Vec<f64>,
    delta: f64,
}

pub fn build_window(w: &LevelWindow) -> Result<Window> {
    w.validate()?;
    let centers = w.energies();
    for pair in centers.windows(2) {
        if pair[1] - pair[0] < 2.0 * w.delta {
            return Err(Error::Invariant(format!(
                "bumps at {} and {} overlap for delta {}",
                pair[0], pair[1], w.delta
            )));
        }
    }
    Ok(Window {
        centers,
        delta: w.delta,
    })
}

impl Window {
    fn nearest(&self, x: f64) -> Option<f64> {
        self.centers
            .iter()
            .copied()
            .find(|c| (x - c).abs() < self.delta)
    }

    /// `F(x)`; `F(±∞) = 0`.
    pub fn value(&self, x: f64) -> f64 {
        let Some(c) = self.nearest(x) else {
            return 0.0;
        };
        let t = (x - c).abs();
        let half = 0.5 * self.delta;
        if t <= half {
            1.0
        } else {
            smoothstep((self.delta - t) / half)
        }
    }

    /// `F′(x)`, the exact derivative of [`Window::value`].
    pub fn derivative(&self, x: f64) -> f64 {
        let Some(c) = self.nearest(x) else {
            return 0.0;
        };
        let t = (x - c).abs();
        let half = 0.5 * self.delta;
        if t <= half {
            0.0
        } else {
            -(x - c).signum() * smoothstep_prime((self.delta - t) / half) / half
        }
    }

    /// `F` at a branch limit.
    pub fn at_limit(&self, l: Limit) -> f64 {
        l.finite().map_or(0.0, |v| self.value(v))
    }

    /// Whether `[lo, hi]` meets a transition band `δ/2 <= |x − E| <= δ`.
    pub fn meets_transition(&self, lo: f64, hi: f64) -> bool {
        let half = 0.5 * self.delta;
        self.centers.iter().any(|&c| {
            let bands = [(c - self.delta, c - half), (c + half, c + self.delta)];
            bands.iter().any(|&(a, b)| lo <= b && hi >= a)
        })
    }

    /// Whether `x` lies in the support `|x − E| < δ` of some bump.
    pub fn in_support(&self, x: f64) -> bool {
        self.nearest(x).is_some()
    }

    pub fn max_support(&self) -> f64 {
        self.centers
            .iter()
            .map(|c| c.abs() + self.delta)
            .fold(0.0, f64::max)
    }
}

/// One curve's share of the conductance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveContribution {
    pub branch: Branch,
    pub limit_minus_inf: Limit,
    pub limit_plus_inf: Limit,
    pub f_minus_inf: f64,
    pub f_plus_inf: f64,
    pub contribution: f64,
    /// `−∫ F′(λ) λ′ dξ` for this curve, when the integral path ran.
    pub integral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductanceReport {
    pub gamma: Gamma,
    pub b: f64,
    pub window: LevelWindow,
    pub transform: SymmetryTransform,
    pub integer: i64,
    pub integral: Option<f64>,
    /// Integration half-width actually used.
    pub xi_half_width: Option<f64>,
    pub per_curve: Vec<CurveContribution>,
}

/// Largest branch index whose finite limits can reach the window support.
fn branch_count(window: &Window, b: f64) -> u32 {
    let e = window.max_support();
    (e * e / (2.0 * b.abs())).floor() as u32 + 2
}

fn all_branches(n_max: u32) -> Vec<Branch> {
    (1..=n_max)
        .rev()
        .map(Branch::minus)
        .chain((1..=n_max).map(Branch::plus))
        .collect()
}

/// Exact conductance from the limit catalog.
pub fn conductance_by_limits(gamma: Gamma, b: f64, w: &LevelWindow) -> Result<ConductanceReport> {
    if w.b != b {
        return Err(Error::Window(format!("window built for b = {}, used with b = {b}", w.b)));
    }
    let window = build_window(w)?;
    let (_, transform) = dispersion::canonicalize(&FiberParams::new(b, gamma, 0.0)?)?;
    let mut per_curve = Vec::new();
    let mut total = 0.0;
    for br in all_branches(branch_count(&window, b)) {
        let (lm, lp) = branch_limits(br, gamma, b)?;
        let (fm, fp) = (window.at_limit(lm), window.at_limit(lp));
        let contribution = fm - fp;
        total += contribution;
        if fm != 0.0 || fp != 0.0 {
            per_curve.push(CurveContribution {
                branch: br,
                limit_minus_inf: lm,
                limit_plus_inf: lp,
                f_minus_inf: fm,
                f_plus_inf: fp,
                contribution,
                integral: None,
            });
        }
    }
    let integer = total.round();
    if (total - integer).abs() > 1e-12 {
        return Err(Error::Invariant(format!("limit sum {total} is not an integer")));
    }
    Ok(ConductanceReport {
        gamma,
        b,
        window: w.clone(),
        transform,
        integer: integer as i64,
        integral: None,
        xi_half_width: None,
        per_curve,
    })
}

/// Memoized samples of the curves of one `(γ, b)` on the lattice
/// `ξ = i·FINE_STEP/√|b|`.
///
/// Each branch is filled by a single task in a fixed order, so results are
/// the same for every thread count. Reusing a sampler across windows and
/// half-widths avoids solving the same point twice.
#[derive(Debug, Clone)]
pub struct CurveSampler {
    pub gamma: Gamma,
    pub b: f64,
    pub cfg: SolverConfig,
    memo: BTreeMap<Branch, BTreeMap<i64, CurvePoint>>,
}

impl CurveSampler {
    pub fn new(gamma: Gamma, b: f64, cfg: SolverConfig) -> Result<Self> {
        FiberParams::new(b, gamma, 0.0)?;
        Ok(Self {
            gamma,
            b,
            cfg,
            memo: BTreeMap::new(),
        })
    }

    pub fn fine_step(&self) -> f64 {
        FINE_STEP / self.b.abs().sqrt()
    }

    /// Number of solved samples so far.
    pub fn len(&self) -> usize {
        self.memo.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampling state of one branch.
struct BranchSampler<'a> {
    br: Branch,
    gamma: Gamma,
    b: f64,
    step: f64,
    cfg: &'a SolverConfig,
    memo: &'a mut BTreeMap<i64, CurvePoint>,
}

impl BranchSampler<'_> {
    /// Sample at lattice index `i`, warm-started from `from` when given.
    fn at(&mut self, i: i64, from: Option<i64>) -> Result<CurvePoint> {
        if let Some(p) = self.memo.get(&i) {
            return Ok(*p);
        }
        let xi = i as f64 * self.step;
        let guess = from.and_then(|j| self.memo.get(&j).map(|p| (j, p))).map(|(j, p)| {
            let dxi = xi - j as f64 * self.step;
            let g = p.theta + self.br.sign.factor() * p.slope * dxi;
            if g > 0.0 {
                g
            } else {
                p.theta
            }
        });
        let p = dispersion::evaluate_from(self.br, &FiberParams::new(self.b, self.gamma, xi)?, self.cfg, guess)?;
        self.memo.insert(i, p);
        Ok(p)
    }

    /// `−∫ F′(λ) λ′ dξ` over `[lo·step, hi·step]` (indices multiples of
    /// [`REFINE_FACTOR`]).
    fn integral(&mut self, window: &Window, lo: i64, hi: i64) -> Result<f64> {
        let g = |p: &CurvePoint| window.derivative(p.lambda) * p.slope;
        let coarse = REFINE_FACTOR as f64 * self.step;
        let mut sum = 0.0;
        let mut prev_i = lo;
        let mut prev = self.at(lo, None)?;
        let mut i = lo + REFINE_FACTOR;
        while i <= hi {
            let cur = self.at(i, Some(prev_i))?;
            let margin = 1.5 * coarse * prev.slope.abs().max(cur.slope.abs());
            let (a, b) = (prev.lambda.min(cur.lambda) - margin, prev.lambda.max(cur.lambda) + margin);
            if window.meets_transition(a, b) {
                let mut left = g(&prev);
                let mut last = prev_i;
                for j in prev_i + 1..=i {
                    let p = self.at(j, Some(last))?;
                    let right = g(&p);
                    sum += 0.5 * self.step * (left + right);
                    left = right;
                    last = j;
                }
            } else {
                sum += 0.5 * coarse * (g(&prev) + g(&cur));
            }
            prev = cur;
            prev_i = i;
            i += REFINE_FACTOR;
        }
        Ok(-sum)
    }
}

/// Conductance by spectral-flow quadrature over `[−Xi, Xi]`.
///
/// `xi_half_width` defaults to `10·√|b|` and is rounded up to a whole
/// number of coarse cells. Curves with index up to `j_max` (default: all
/// branches whose limits can reach the support, plus one) are included; a
/// curve inside the support at `±Xi`, or an omitted curve that enters it,
/// gives a widen-window error.
pub fn conductance_by_integral(
    sampler: &mut CurveSampler,
    w: &LevelWindow,
    xi_half_width: Option<f64>,
    j_max: Option<u32>,
) -> Result<ConductanceReport> {
    let (gamma, b) = (sampler.gamma, sampler.b);
    let mut report = conductance_by_limits(gamma, b, w)?;
    let window = build_window(w)?;
    let root_b = b.abs().sqrt();
    let xi = xi_half_width.unwrap_or(DEFAULT_XI_SCALE * root_b);
    if !(xi.is_finite() && xi >= 8.0 * root_b - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "integration half-width {xi} is below 8 sqrt|b| = {}",
            8.0 * root_b
        )));
    }
    let step = sampler.fine_step();
    let cells = (xi / (REFINE_FACTOR as f64 * step) - 1e-9).ceil() as i64;
    let last = cells * REFINE_FACTOR;
    let xi_used = last as f64 * step;

    let n_max = j_max.unwrap_or_else(|| branch_count(&window, b));
    let branches = all_branches(n_max);
    let mut maps: Vec<(Branch, BTreeMap<i64, CurvePoint>)> = branches
        .iter()
        .map(|br| (*br, sampler.memo.remove(br).unwrap_or_default()))
        .collect();
    let cfg = sampler.cfg;
    let outcome: Vec<Result<f64>> = maps
        .par_iter_mut()
        .map(|(br, memo)| {
            let mut s = BranchSampler {
                br: *br,
                gamma,
                b,
                step,
                cfg: &cfg,
                memo,
            };
            let value = s.integral(&window, -last, last)?;
            for end in [-last, last] {
                let p = s.at(end, None)?;
                if window.in_support(p.lambda) && window.derivative(p.lambda) != 0.0 {
                    return Err(Error::WidenWindow(format!(
                        "branch {br} is in a transition band at xi = {}",
                        end as f64 * step
                    )));
                }
            }
            Ok(value)
        })
        .collect();
    for (br, memo) in maps {
        sampler.memo.insert(br, memo);
    }

    // the first omitted curves must stay outside the support at both ends
    for br in [Branch::plus(n_max + 1), Branch::minus(n_max + 1)] {
        for end in [-xi_used, xi_used] {
            let p = dispersion::evaluate(br, &FiberParams::new(b, gamma, end)?, &cfg)?;
            if window.in_support(p.lambda) {
                return Err(Error::WidenWindow(format!(
                    "omitted branch {br} is inside the window support at xi = {end}; raise j_max"
                )));
            }
        }
    }

    let mut total = 0.0;
    let mut per_curve = Vec::new();
    for (br, r) in branches.iter().zip(outcome) {
        let value = r?;
        total += value;
        let (lm, lp) = branch_limits(*br, gamma, b)?;
        let (fm, fp) = (window.at_limit(lm), window.at_limit(lp));
        if fm != 0.0 || fp != 0.0 || value.abs() > 1e-6 {
            per_curve.push(CurveContribution {
                branch: *br,
                limit_minus_inf: lm,
                limit_plus_inf: lp,
                f_minus_inf: fm,
                f_plus_inf: fp,
                contribution: fm - fp,
                integral: Some(value),
            });
        }
    }
    report.integral = Some(total);
    report.xi_half_width = Some(xi_used);
    report.per_curve = per_curve;
    Ok(report)
}

/// Both paths with a fresh sampler.
pub fn conductance(
    gamma: Gamma,
    b: f64,
    w: &LevelWindow,
    xi_half_width: Option<f64>,
    cfg: &SolverConfig,
) -> Result<ConductanceReport> {
    let mut sampler = CurveSampler::new(gamma, b, *cfg)?;
    conductance_by_integral(&mut sampler, w, xi_half_width, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels() {
        let l = landau_levels(1.0, 2);
        let s = 2f64.sqrt();
        let want = [-2.0, -s, 0.0, s, 2.0];
        for (a, b) in l.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(level_energy(0, 1.0), 0.0);
        assert!((level_energy(1, 2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn window_shape() {
        let w = LevelWindow::new(1.0, &[0, 1], None).unwrap();
        let f = build_window(&w).unwrap();
        assert_eq!(f.value(0.0), 1.0);
        assert_eq!(f.value(2f64.sqrt()), 1.0);
        assert_eq!(f.value(-(2f64.sqrt())), 0.0);
        assert_eq!(f.value(2.0), 0.0);
        // rising and falling edges integrate to ±1
        let d = w.delta;
        let n = 20000;
        let trap = |a: f64, b: f64| {
            let h = (b - a) / n as f64;
            (0..=n)
                .map(|i| {
                    let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
                    wgt * f.derivative(a + i as f64 * h)
                })
                .sum::<f64>()
                * h
        };
        assert!((trap(-d, -d / 2.0) - 1.0).abs() < 1e-10);
        assert!((trap(d / 2.0, d) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn window_validation() {
        assert!(LevelWindow::new(1.0, &[], None).is_err());
        assert!(LevelWindow::new(1.0, &[1], Some(0.3)).is_err());
        assert!(LevelWindow::new(1.0, &[0], Some(0.3)).is_ok());
        let w = LevelWindow::new(1.0, &[1, 0, 1], None).unwrap();
        assert_eq!(w.selected, vec![0, 1]);
        assert!(w.delta < outer_half_gap(1, 1.0));
    }

    #[test]
    fn integer_table() {
        let w0 = LevelWindow::new(1.0, &[0], None).unwrap();
        let w01 = LevelWindow::new(1.0, &[0, 1], None).unwrap();
        let g = |v: f64| Gamma::Finite(v);
        let v = |gamma, w: &LevelWindow| conductance_by_limits(gamma, w.b, w).unwrap().integer;
        assert_eq!(v(g(0.7), &w0), 1);
        assert_eq!(v(g(0.0), &w0), 0);
        assert_eq!(v(Gamma::Infinite, &w0), 2);
        assert_eq!(v(Gamma::Infinite, &w01), 3);
        let wm = LevelWindow::new(-1.0, &[0], None).unwrap();
        assert_eq!(v(g(0.7), &wm), -1);
    }

    #[test]
    fn flat_band_integral_zero() {
        let w = LevelWindow::new(1.0, &[0], None).unwrap();
        let r = conductance(Gamma::Finite(0.0), 1.0, &w, None, &SolverConfig::default()).unwrap();
        assert_eq!(r.integer, 0);
        assert!(r.integral.unwrap().abs() < 1e-2);
    }
}
