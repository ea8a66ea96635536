//! Symmetric tridiagonal eigensolver: Sturm-count bisection for eigenvalues,
//! inverse iteration (LDLᵀ) for eigenvectors.

use crate::error::{Error, Result};

/// Relative bracket width used by [`lowest_eigenvalues`]: the absolute width
/// is `DEFAULT_TOL * max(1, |ν|)`.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Inverse iteration gives up after this many solves.
pub const MAX_INVERSE_ITER: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
    off_sq: Vec<f64>,
    pivmin: f64,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let off_sq: Vec<f64> = off.iter().map(|e| e * e).collect();
        let pivmin = f64::MIN_POSITIVE * off_sq.iter().fold(1.0_f64, |m, e| m.max(*e));
        Ok(Self {
            diag,
            off,
            off_sq,
            pivmin,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Number of eigenvalues strictly below `x`.
    ///
    /// Counts negative pivots of the LDLᵀ factorization of `T - x`. Exactly
    /// zero pivots are nudged to `-pivmin`, the usual LAPACK convention.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = self.pivmin;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        count += (q < 0.0) as usize;
        for (d, e2) in self.diag[1..].iter().zip(&self.off_sq) {
            q = (d - x) - e2 / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            count += (q < 0.0) as usize;
        }
        count
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.off[i].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

fn tol_at(rel: f64, x: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Bisection for eigenvalue number `k` (0-based, ascending) inside a bracket
/// that is known to satisfy `count(lo) <= k < count(hi)`.
fn bisect(t: &SymTridiag, k: usize, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol_at(rel_tol, mid) || mid <= lo || mid >= hi {
            return mid;
        }
        if t.sturm_count(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

fn check_index(t: &SymTridiag, k: usize) -> Result<()> {
    if k >= t.dim() {
        return Err(Error::Size {
            requested: k + 1,
            dim: t.dim(),
        });
    }
    Ok(())
}

/// Eigenvalue number `k` (0-based, ascending), bracketed from the Gershgorin
/// interval down to width `rel_tol * max(1, |ν|)`.
pub fn kth_eigenvalue(t: &SymTridiag, k: usize, rel_tol: f64) -> Result<f64> {
    check_index(t, k)?;
    let (lo, hi) = t.gershgorin();
    let pad = 1e-12 * (lo.abs().max(hi.abs())).max(1.0);
    Ok(bisect(t, k, lo - pad, hi + pad, rel_tol))
}

/// Estimate of an eigenvalue with the expected size of its error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hint {
    pub center: f64,
    pub width: f64,
}

impl Hint {
    /// Hint with the default initial half-width `1e-3 * max(1, |center|)`.
    pub fn new(center: f64) -> Self {
        Self {
            center,
            width: 1e-3 * center.abs().max(1.0),
        }
    }
}

/// As [`kth_eigenvalue`], starting the bracket from a nearby estimate.
///
/// The bracket is grown geometrically around `hint` until the Sturm counts
/// enclose eigenvalue `k`, so a poor hint only costs extra counts.
pub fn kth_eigenvalue_near(t: &SymTridiag, k: usize, hint: f64, rel_tol: f64) -> Result<f64> {
    kth_eigenvalue_hinted(t, k, Hint::new(hint), rel_tol)
}

/// As [`kth_eigenvalue_near`] with an explicit initial half-width.
pub fn kth_eigenvalue_hinted(t: &SymTridiag, k: usize, hint: Hint, rel_tol: f64) -> Result<f64> {
    check_index(t, k)?;
    let center = hint.center;
    if !center.is_finite() {
        return kth_eigenvalue(t, k, rel_tol);
    }
    let (glo, ghi) = t.gershgorin();
    let start = hint.width.max(tol_at(rel_tol, center));
    let mut step = start;
    let mut lo = center - step;
    while lo > glo && t.sturm_count(lo) > k {
        step *= 4.0;
        lo = center - step;
    }
    let lo = lo.max(glo - 1e-12 * glo.abs().max(1.0));
    let mut step = start;
    let mut hi = center + step;
    while hi < ghi && t.sturm_count(hi) <= k {
        step *= 4.0;
        hi = center + step;
    }
    let hi = hi.min(ghi + 1e-12 * ghi.abs().max(1.0));
    Ok(bisect(t, k, lo, hi, rel_tol))
}

/// The `k` algebraically smallest eigenvalues, ascending.
pub fn lowest_eigenvalues(t: &SymTridiag, k: usize) -> Result<Vec<f64>> {
    if k > t.dim() {
        return Err(Error::Size {
            requested: k,
            dim: t.dim(),
        });
    }
    (0..k).map(|i| kth_eigenvalue(t, i, DEFAULT_TOL)).collect()
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

fn fix_sign(v: &mut [f64]) {
    let vmax = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * vmax) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Unit eigenvector for an eigenvalue estimate `nu` by inverse iteration.
///
/// The result satisfies `‖T v − ν v‖₂ <= 1e-8 ‖T‖∞` and its first
/// non-negligible component is positive.
pub fn eigenvector(t: &SymTridiag, nu: f64) -> Result<Vec<f64>> {
    let n = t.dim();
    let norm = t.norm_inf().max(f64::MIN_POSITIVE);
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let guard = f64::EPSILON * norm;
    let target = 1e-8 * norm;
    // see start_vector
    let mut v = start_vector(n);
    let mut sigma = nu;
    for _ in 0..MAX_INVERSE_ITER {
        let mut x = match Ldlt::new(t, sigma, guard) {
            Some(f) => f.solve(&v),
            None => {
                sigma += 1e-12 * nu.abs().max(1.0);
                continue;
            }
        };
        if !normalize(&mut x) {
            return Err(Error::Convergence(MAX_INVERSE_ITER));
        }
        v = x;
        let tv = t.apply(&v);
        let res = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - nu * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if res <= target {
            fix_sign(&mut v);
            return Ok(v);
        }
    }
    Err(Error::Convergence(MAX_INVERSE_ITER))
}

/// Bracket `[lo, hi]` with `count(lo) <= k < count(hi)` around a hint,
/// returned with both counts.
fn bracket(t: &SymTridiag, k: usize, hint: Option<Hint>, rel_tol: f64) -> (f64, usize, f64, usize) {
    let (glo, ghi) = t.gershgorin();
    let pad = 1e-12 * (glo.abs().max(ghi.abs())).max(1.0);
    let Some(hint) = hint.filter(|h| h.center.is_finite()) else {
        return (glo - pad, 0, ghi + pad, t.dim());
    };
    let center = hint.center;
    let start = hint.width.max(tol_at(rel_tol, center));
    let mut step = start;
    let (mut lo, mut count_lo) = (center - step, t.sturm_count(center - step));
    while count_lo > k {
        step *= 4.0;
        lo = center - step;
        if lo <= glo {
            (lo, count_lo) = (glo - pad, 0);
            break;
        }
        count_lo = t.sturm_count(lo);
    }
    let mut step = start;
    let (mut hi, mut count_hi) = (center + step, t.sturm_count(center + step));
    while count_hi <= k {
        step *= 4.0;
        hi = center + step;
        if hi >= ghi {
            (hi, count_hi) = (ghi + pad, t.dim());
            break;
        }
        count_hi = t.sturm_count(hi);
    }
    (lo, count_lo, hi, count_hi)
}

/// Relative width below which an isolated eigenvalue is finished by
/// inverse iteration instead of bisection.
const ISOLATION_WIDTH: f64 = 1e-4;

/// Eigenvalue `k` and its unit eigenvector. `hint` narrows the initial bracket.
///
/// Bisection runs only until eigenvalue `k` is alone in a bracket of relative
/// width [`ISOLATION_WIDTH`]. Inverse iteration at the bracket midpoint then
/// gives the eigenvector, and its Rayleigh quotient the eigenvalue. If the
/// quotient leaves the bracket, plain bisection to `rel_tol` is used.
pub fn eigenpair(
    t: &SymTridiag,
    k: usize,
    hint: Option<Hint>,
    rel_tol: f64,
) -> Result<(f64, Vec<f64>)> {
    eigenpair_from(t, k, hint, None, rel_tol)
}

/// As [`eigenpair`], with a starting vector for the inverse iteration
/// (ignored unless its length matches).
pub fn eigenpair_from(
    t: &SymTridiag,
    k: usize,
    hint: Option<Hint>,
    start: Option<&[f64]>,
    rel_tol: f64,
) -> Result<(f64, Vec<f64>)> {
    check_index(t, k)?;
    let (mut lo, mut count_lo, mut hi, mut count_hi) = bracket(t, k, hint, rel_tol);
    loop {
        let mid = 0.5 * (lo + hi);
        let isolated = count_lo == k && count_hi == k + 1;
        if isolated && hi - lo <= tol_at(ISOLATION_WIDTH, mid) {
            break;
        }
        if hi - lo <= tol_at(rel_tol, mid) || mid <= lo || mid >= hi {
            // cluster narrower than the tolerance
            let v = eigenvector(t, mid)?;
            return Ok((mid, v));
        }
        let c = t.sturm_count(mid);
        if c > k {
            hi = mid;
            count_hi = c;
        } else {
            lo = mid;
            count_lo = c;
        }
    }

    let sigma = 0.5 * (lo + hi);
    let norm = t.norm_inf().max(f64::MIN_POSITIVE);
    let noise = 8.0 * f64::EPSILON * norm;
    let slack = noise + tol_at(rel_tol, sigma);
    if let Some(factor) = Ldlt::new(t, sigma, f64::EPSILON * norm) {
        let mut v = match start {
            Some(v0) if v0.len() == t.dim() => {
                let mut v = v0.to_vec();
                if normalize(&mut v) {
                    v
                } else {
                    start_vector(t.dim())
                }
            }
            _ => start_vector(t.dim()),
        };
        let mut previous = f64::NAN;
        for _ in 0..MAX_INVERSE_ITER {
            let mut x = factor.solve(&v);
            if !normalize(&mut x) {
                break;
            }
            v = x;
            let rho = rayleigh(t, &v);
            if (rho - previous).abs() <= tol_at(rel_tol, rho).max(noise) {
                if rho < lo - slack || rho > hi + slack {
                    break;
                }
                fix_sign(&mut v);
                return Ok((rho, v));
            }
            previous = rho;
        }
    }
    let nu = bisect(t, k, lo, hi, rel_tol);
    Ok((nu, eigenvector(t, nu)?))
}

fn start_vector(n: usize) -> Vec<f64> {
    // deterministic, with no special symmetry
    let mut v: Vec<f64> = (0..n)
        .map(|j| 1.0 + 0.5 * ((j as f64) * 0.7548776662).sin())
        .collect();
    normalize(&mut v);
    v
}

fn rayleigh(t: &SymTridiag, v: &[f64]) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for i in 0..n {
        s += t.diag[i] * v[i] * v[i];
        if i + 1 < n {
            s += 2.0 * t.off[i] * v[i] * v[i + 1];
        }
    }
    s
}

/// LDLᵀ factorization of `T − σ` with guarded pivots.
struct Ldlt {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl Ldlt {
    fn new(t: &SymTridiag, sigma: f64, guard: f64) -> Option<Self> {
        let n = t.dim();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let fix = |p: f64| {
            if p == 0.0 {
                None
            } else if p.abs() < guard {
                Some(guard.copysign(p))
            } else {
                Some(p)
            }
        };
        d[0] = fix(t.diag[0] - sigma)?;
        for i in 1..n {
            l[i - 1] = t.off[i - 1] / d[i - 1];
            d[i] = fix(t.diag[i] - sigma - l[i - 1] * t.off[i - 1])?;
        }
        Some(Self { d, l })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut y = rhs.to_vec();
        for i in 1..n {
            y[i] -= self.l[i - 1] * y[i - 1];
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= self.l[i] * y[i + 1];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(m: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; m], vec![-1.0; m - 1]).unwrap()
    }

    #[test]
    fn three_by_three() {
        let ev = lowest_eigenvalues(&laplacian(3), 3).unwrap();
        let s = 2f64.sqrt();
        for (a, b) in ev.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn identity() {
        let t = SymTridiag::new(vec![1.0; 5], vec![0.0; 4]).unwrap();
        let ev = lowest_eigenvalues(&t, 2).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-10 && (ev[1] - 1.0).abs() < 1e-10);
        let v = eigenvector(&t, 1.0).unwrap();
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_laplacian_ground_state() {
        for m in [10, 50, 200] {
            let ev = lowest_eigenvalues(&laplacian(m), 1).unwrap();
            let exact = 2.0 - 2.0 * (PI / (m + 1) as f64).cos();
            assert!((ev[0] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn middle_eigenvector_three() {
        let t = laplacian(3);
        let v = eigenvector(&t, 2.0).unwrap();
        let s = 0.5f64.sqrt();
        assert!((v[0] - s).abs() < 1e-8 && v[1].abs() < 1e-8 && (v[2] + s).abs() < 1e-8);
    }

    #[test]
    fn size_error() {
        assert!(matches!(
            lowest_eigenvalues(&laplacian(3), 4),
            Err(Error::Size { requested: 4, dim: 3 })
        ));
    }

    #[test]
    fn hinted_matches_plain() {
        let t = laplacian(40);
        for k in [0, 3, 17] {
            let a = kth_eigenvalue(&t, k, DEFAULT_TOL).unwrap();
            for hint in [a, a + 0.3, a - 1.0, -5.0, 10.0] {
                let b = kth_eigenvalue_near(&t, k, hint, DEFAULT_TOL).unwrap();
                assert!((a - b).abs() < 2e-10, "k={k} hint={hint}: {a} vs {b}");
            }
        }
    }
}
