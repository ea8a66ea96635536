//! C interface.
//!
//! Every function returns an [`EcStatus`]; on failure a message is kept per
//! thread and can be read with [`ec_last_error`]. Curve samples live behind
//! the opaque [`EcCurves`] handle, released with [`ec_curves_free`]. The
//! boundary parameter is a `double` where `INFINITY` selects the zigzag
//! condition `ψ₁(0) = 0`. Branches are signed indices: `+n` or `-n`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edgecurves::conductance::{conductance_by_integral, conductance_by_limits, CurveSampler, LevelWindow};
use edgecurves::dispersion::{evaluate, sweep, DispersionCurve, SolverConfig};
use edgecurves::{Branch, Error, FiberParams, Gamma, Sign};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcStatus {
    Ok = 0,
    /// A parameter was out of range.
    InvalidArgument = 1,
    /// A solver failed or an invariant was violated.
    Numerical = 2,
    /// A required pointer was null.
    NullPointer = 3,
    /// An index was out of range.
    OutOfRange = 4,
    /// An internal panic was caught.
    Panic = 5,
}

/// Sampled dispersion curves.
pub struct EcCurves {
    curves: Vec<DispersionCurve>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: EcStatus, msg: &str) -> EcStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> EcStatus {
    match e {
        Error::InvalidParameter(_) | Error::Window(_) | Error::Domain(_) => EcStatus::InvalidArgument,
        Error::Sample { source, .. } => status_of(source),
        _ => EcStatus::Numerical,
    }
}

fn from_error(e: &Error) -> EcStatus {
    fail(status_of(e), &e.to_string())
}

/// Run `f`, translating errors and panics into status codes.
fn guarded(f: impl FnOnce() -> Result<(), EcStatus>) -> EcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EcStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(EcStatus::Panic, "internal panic"),
    }
}

fn gamma_of(g: f64) -> Result<Gamma, EcStatus> {
    if g == f64::INFINITY {
        Ok(Gamma::Infinite)
    } else {
        Gamma::finite(g).map_err(|e| from_error(&e))
    }
}

fn branch_of(index: i32) -> Result<Branch, EcStatus> {
    let sign = if index > 0 { Sign::Plus } else { Sign::Minus };
    Branch::new(sign, index.unsigned_abs()).map_err(|e| from_error(&e))
}

fn out<T>(p: *mut T, name: &str) -> Result<&'static mut T, EcStatus> {
    // SAFETY: the caller guarantees that a non-null pointer is valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| fail(EcStatus::NullPointer, &format!("{name} is null")))
}

fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], EcStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(EcStatus::NullPointer, &format!("{name} is null")));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

/// Message of the last failure on this thread; empty after a success.
///
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn ec_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Energy `λ` and slope `dλ/dξ` of branch `branch` at `(b, gamma, xi)`.
///
/// # Safety
/// `out_lambda` and `out_slope` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ec_theta(
    b: f64,
    gamma: f64,
    branch: i32,
    xi: f64,
    out_lambda: *mut f64,
    out_slope: *mut f64,
) -> EcStatus {
    guarded(|| {
        let lambda = out(out_lambda, "out_lambda")?;
        let slope = out(out_slope, "out_slope")?;
        let fp = FiberParams::new(b, gamma_of(gamma)?, xi).map_err(|e| from_error(&e))?;
        let p = evaluate(branch_of(branch)?, &fp, &SolverConfig::default()).map_err(|e| from_error(&e))?;
        *lambda = p.lambda;
        *slope = p.slope;
        Ok(())
    })
}

/// Sample `n_branches` curves on `steps` momenta from `xi_min` to `xi_max`.
///
/// On success `*out_curves` owns a handle to release with [`ec_curves_free`].
///
/// # Safety
/// `branches` must point to `n_branches` readable values;
/// `out_curves` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ec_curves_sweep(
    b: f64,
    gamma: f64,
    xi_min: f64,
    xi_max: f64,
    steps: usize,
    branches: *const i32,
    n_branches: usize,
    out_curves: *mut *mut EcCurves,
) -> EcStatus {
    guarded(|| {
        let dst = out(out_curves, "out_curves")?;
        *dst = ptr::null_mut();
        let brs = slice(branches, n_branches, "branches")?
            .iter()
            .map(|&i| branch_of(i))
            .collect::<Result<Vec<_>, _>>()?;
        let curves = sweep(gamma_of(gamma)?, b, xi_min, xi_max, steps, &brs, &SolverConfig::default())
            .map_err(|e| from_error(&e))?;
        *dst = Box::into_raw(Box::new(EcCurves { curves }));
        Ok(())
    })
}

/// Number of curves in the handle; 0 for null.
///
/// # Safety
/// `curves` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ec_curves_count(curves: *const EcCurves) -> usize {
    // SAFETY: per the contract above.
    unsafe { curves.as_ref() }.map_or(0, |c| c.curves.len())
}

/// Samples per curve; 0 for null or an out-of-range curve.
///
/// # Safety
/// `curves` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ec_curves_len(curves: *const EcCurves, curve: usize) -> usize {
    // SAFETY: per the contract above.
    unsafe { curves.as_ref() }
        .and_then(|c| c.curves.get(curve))
        .map_or(0, DispersionCurve::len)
}

/// Sample `index` of curve `curve`: momentum, energy, slope and the signed
/// branch index.
///
/// # Safety
/// `curves` must be a live handle; output pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ec_curves_get(
    curves: *const EcCurves,
    curve: usize,
    index: usize,
    out_xi: *mut f64,
    out_lambda: *mut f64,
    out_slope: *mut f64,
    out_branch: *mut i32,
) -> EcStatus {
    guarded(|| {
        // SAFETY: per the contract above.
        let c = unsafe { curves.as_ref() }.ok_or_else(|| fail(EcStatus::NullPointer, "curves is null"))?;
        let (xi, lambda, slope, branch) = (
            out(out_xi, "out_xi")?,
            out(out_lambda, "out_lambda")?,
            out(out_slope, "out_slope")?,
            out(out_branch, "out_branch")?,
        );
        let d = c
            .curves
            .get(curve)
            .filter(|d| index < d.len())
            .ok_or_else(|| fail(EcStatus::OutOfRange, &format!("no sample ({curve}, {index})")))?;
        *xi = d.xis[index];
        *lambda = d.lambda(index);
        *slope = d.slopes[index];
        *branch = d.branch.signed_index() as i32;
        Ok(())
    })
}

/// Release a handle from [`ec_curves_sweep`]; null is ignored.
///
/// # Safety
/// `curves` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ec_curves_free(curves: *mut EcCurves) {
    if !curves.is_null() {
        // SAFETY: the handle came from Box::into_raw and is freed once.
        drop(unsafe { Box::from_raw(curves) });
    }
}

/// Edge Hall conductance for the signed Landau levels `levels`.
///
/// `delta <= 0` selects the default bump half-width. With `with_integral`
/// nonzero the quadrature is also run and stored in `*out_integral`;
/// otherwise `*out_integral` is NaN.
///
/// # Safety
/// `levels` must point to `n_levels` readable values; output pointers must
/// be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ec_conductance(
    b: f64,
    gamma: f64,
    levels: *const i64,
    n_levels: usize,
    delta: f64,
    with_integral: i32,
    out_integer: *mut i64,
    out_integral: *mut f64,
) -> EcStatus {
    guarded(|| {
        let integer = out(out_integer, "out_integer")?;
        let integral = out(out_integral, "out_integral")?;
        let levels = slice(levels, n_levels, "levels")?;
        let gamma = gamma_of(gamma)?;
        let w = LevelWindow::new(b, levels, (delta > 0.0).then_some(delta)).map_err(|e| from_error(&e))?;
        let report = if with_integral != 0 {
            let mut s = CurveSampler::new(gamma, b, SolverConfig::default()).map_err(|e| from_error(&e))?;
            conductance_by_integral(&mut s, &w, None, None)
        } else {
            conductance_by_limits(gamma, b, &w)
        }
        .map_err(|e| from_error(&e))?;
        *integer = report.integer;
        *integral = report.integral.unwrap_or(f64::NAN);
        Ok(())
    })
}
