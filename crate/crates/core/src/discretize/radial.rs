//! Radial reduction −u'' − u'/r + (ν²/r²)u + V(r)u, finite volumes on vertex
//! nodes, symmetrized with the weight r.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below x (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i > 0 {
                self.off[i - 1] * self.off[i - 1]
            } else {
                0.0
            };
            q = self.diag[i] - x - if i > 0 { e2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue number `idx` (0 = lowest) by bisection.
    pub fn eigenvalue(&self, idx: usize) -> f64 {
        let n = self.diag.len();
        assert!(idx < n);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-15 * mid.abs().max(1.0) {
                break;
            }
            if self.count_below(mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn lowest(&self) -> f64 {
        self.eigenvalue(0)
    }
}

pub fn assemble_radial(r_in: f64, r_out: f64, nu: f64, m: usize) -> Result<Tridiagonal> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "angular order {nu} must be non-negative"
        )));
    }
    assemble_radial_with(r_in, r_out, m, |_| nu, |_| 0.0)
}

/// General form with position-dependent angular order ν(r) and potential V(r).
/// At r_in = 0 the origin is a half-cell node when ν(0) = 0 and a Dirichlet
/// node otherwise.
pub fn assemble_radial_with<N, V>(
    r_in: f64,
    r_out: f64,
    m: usize,
    nu: N,
    v: V,
) -> Result<Tridiagonal>
where
    N: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
{
    if !(r_in >= 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::InvalidRange(format!(
            "need 0 <= r_in < r_out, got ({r_in}, {r_out})"
        )));
    }
    if m < 8 {
        return Err(Error::InvalidParams(format!("m = {m} must be at least 8")));
    }
    let d = (r_out - r_in) / m as f64;
    let r = |i: usize| r_in + i as f64 * d;
    let regular_origin = r_in == 0.0 && nu(0.0) == 0.0;
    let first = if regular_origin { 0 } else { 1 };
    let last = m - 1;
    let mut a_diag = Vec::new();
    let mut a_off = Vec::new();
    let mut w = Vec::new();
    for i in first..=last {
        let ri = r(i);
        let right = ri + 0.5 * d;
        if i == 0 {
            a_diag.push(right / d + v(0.25 * d) * d * d / 8.0);
            w.push(d * d / 8.0);
        } else {
            let left = ri - 0.5 * d;
            let n = nu(ri);
            a_diag.push((left + right) / d + n * n * d / ri + v(ri) * ri * d);
            w.push(ri * d);
        }
        if i < last {
            a_off.push(-right / d);
        }
    }
    let diag = a_diag.iter().zip(&w).map(|(a, w)| a / w).collect();
    let off = a_off
        .iter()
        .enumerate()
        .map(|(k, a)| a / (w[k] * w[k + 1]).sqrt())
        .collect();
    Ok(Tridiagonal { diag, off })
}

/// Lowest eigenvalue extrapolated from m and 2m samples assuming second-order error.
pub fn radial_lowest_extrapolated<N, V>(r_in: f64, r_out: f64, m: usize, nu: N, v: V) -> Result<f64>
where
    N: Fn(f64) -> f64 + Copy,
    V: Fn(f64) -> f64 + Copy,
{
    let a = assemble_radial_with(r_in, r_out, m, nu, v)?.lowest();
    let b = assemble_radial_with(r_in, r_out, 2 * m, nu, v)?.lowest();
    Ok((4.0 * b - a) / 3.0)
}
