//! Periodic first-order operator L = d/ds + i·h(s) on [0, ρ).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PeriodicOperator {
    pub rho: f64,
    /// Link angle Δ·(h_j + h_{j+1})/2 between samples j and j+1.
    pub link: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl PeriodicOperator {
    /// w = (2π)^{-1} ∫ h.
    pub fn winding(&self) -> f64 {
        self.link.iter().sum::<f64>() / (2.0 * PI)
    }

    pub fn smallest_singular_value(&self) -> f64 {
        let sv = self.matrix.clone().singular_values();
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// (Lu)_j = (e^{i a_j} u_{j+1} − u_j)/Δ with periodic wrap.
pub fn assemble_periodic_1d(h: &[f64], rho: f64) -> Result<PeriodicOperator> {
    let n = h.len();
    if n < 2 {
        return Err(Error::InvalidParams(
            "need at least two periodic samples".into(),
        ));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParams("period must be positive".into()));
    }
    let d = rho / n as f64;
    let link: Vec<f64> = (0..n).map(|j| 0.5 * d * (h[j] + h[(j + 1) % n])).collect();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..n {
        m[(j, j)] -= Complex64::new(1.0 / d, 0.0);
        m[(j, (j + 1) % n)] += Complex64::from_polar(1.0 / d, link[j]);
    }
    Ok(PeriodicOperator {
        rho,
        link,
        matrix: m,
    })
}
