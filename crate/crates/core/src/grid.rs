//! Uniform grids on a truncated half-line `[0, L]`.
//!
//! Node `x_0 = 0` carries the physical boundary condition, node `x_N = L` the
//! artificial truncation. All eigenfunctions targeted here decay like a
//! Gaussian beyond the harmonic well, so the truncation error is negligible
//! once `L` clears the well by a few magnetic lengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of subintervals accepted by [`make_grid`].
pub const MIN_INTERVALS: usize = 8;

/// Default node spacing for `|b| <= 1`; scaled by `1/|b|` above that.
///
/// The discretization error of the eigenvalues is about `-b²h²/16`, so this
/// keeps the discrete zero-mode floor above `-1e-6`.
pub const DEFAULT_SPACING: f64 = 0.00125;

const MAX_INTERVALS: usize = 400_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    intervals: usize,
}

impl Grid {
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.intervals as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Midpoint between nodes `j` and `j + 1`.
    pub fn half_node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.intervals).map(|j| self.node(j)).collect()
    }
}

pub fn make_grid(length: f64, intervals: usize) -> Result<Grid> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
    }
    if intervals < MIN_INTERVALS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_INTERVALS} subintervals, got {intervals}"
        )));
    }
    Ok(Grid { length, intervals })
}

/// Default spacing for field strength `b`.
pub fn default_spacing(b: f64) -> f64 {
    DEFAULT_SPACING / b.abs().max(1.0)
}

/// Truncation length and subinterval count for branch indices up to `n_max`
/// at momenta `xi >= xi_min`, using [`default_spacing`].
pub fn auto_domain(b: f64, xi_min: f64, n_max: usize) -> (f64, usize) {
    auto_domain_with_spacing(b, xi_min, n_max, default_spacing(b))
}

/// As [`auto_domain`], with an explicit upper bound on the spacing.
///
/// The spacing is always capped at `min(0.01, 0.1/√|b|)`.
pub fn auto_domain_with_spacing(b: f64, xi_min: f64, n_max: usize, spacing: f64) -> (f64, usize) {
    let b = b.abs().max(f64::MIN_POSITIVE);
    let root_b = b.sqrt();
    let well = (-xi_min / b).max(0.0);
    let n_max = n_max.max(1) as f64;
    let required = well + 8.0 / root_b + 2.0 * n_max / root_b;
    let h = spacing.min(0.01).min(0.1 / root_b);
    let intervals = ((required / h).ceil() as usize).clamp(MIN_INTERVALS, MAX_INTERVALS);
    let length = if intervals as f64 * h >= required {
        intervals as f64 * h
    } else {
        // hit the interval cap: keep the length, give up on the spacing
        required
    };
    (length, intervals)
}

/// Convenience wrapper returning a ready [`Grid`].
pub fn auto_grid(b: f64, xi_min: f64, n_max: usize, spacing: f64) -> Grid {
    let (length, intervals) = auto_domain_with_spacing(b, xi_min, n_max, spacing);
    Grid { length, intervals }
}
