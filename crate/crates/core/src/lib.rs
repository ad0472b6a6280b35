//! Magnetic and electric Dirichlet Laplacians on perforated planar domains:
//! thick disk families, subharmonic potentials with quantized flux, their
//! discretization, lowest eigenvalues and the inequality checks built on them.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod potential;
pub mod quad;

pub use error::{Error, Result};
pub use num_complex::Complex64;
