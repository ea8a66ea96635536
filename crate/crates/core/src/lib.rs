//! Dispersion curves and edge Hall conductance for magnetic Dirac operators
//! on the half-plane with local boundary conditions.

pub mod cli;
pub mod conductance;
pub mod dirac;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod output;
pub mod params;
pub mod schrodinger;
pub mod tridiag;
pub mod validation;

pub use error::{Error, Result};
pub use grid::{auto_domain, make_grid, Grid};
pub use params::{gamma_from_eta, Branch, FiberParams, Gamma, Sign};
