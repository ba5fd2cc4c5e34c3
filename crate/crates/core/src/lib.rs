//! Complex geometrical optics solutions, boundary probing and low-pass
//! inversion for recovering a potential `q` in `Δ + k² + q` from
//! Dirichlet-to-Neumann data, plus the sweep harness used to measure how the
//! error depends on `k`.

pub mod error;
pub mod fft;
pub mod grid;
pub mod krylov;
pub mod quadrature;

pub mod alessandrini;
pub mod cgo;
pub mod forward;
pub mod reconstruction;

pub mod io;

pub use error::{LabError, Result};
pub mod lab;
pub mod cli;
