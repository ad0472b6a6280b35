//! Mode-by-mode reduction of the boundary form on Ω₀ × circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::potential::PotentialField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierCheck {
    pub norm_sq: f64,
    pub parseval_residual: f64,
    /// ‖Lu‖² + ‖L̄u‖² with a forward difference in θ.
    pub form_direct: f64,
    /// Σ_n ‖L_{nψ}u_n‖² + ‖L̄_{nψ}u_n‖².
    pub form_modes: f64,
    pub form_residual: f64,
    /// Fraction of the energy outside the mode window.
    pub outside_energy: f64,
}

/// Forward-difference ∂_z and ∂_z̄ of node values, zero outside the grid.
pub fn complex_derivatives(grid: &Grid, u: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let h = grid.h();
    let i_unit = Complex64::new(0.0, 1.0);
    let mut dz = Vec::with_capacity(u.len());
    let mut dzb = Vec::with_capacity(u.len());
    for (k, &(i, j)) in grid.nodes.iter().enumerate() {
        let at = |di: i64, dj: i64| {
            grid.node_at(i as i64 + di, j as i64 + dj)
                .map_or(Complex64::new(0.0, 0.0), |q| u[q])
        };
        let ux = (at(1, 0) - u[k]) / h;
        let uy = (at(0, 1) - u[k]) / h;
        dz.push(0.5 * (ux - i_unit * uy));
        dzb.push(0.5 * (ux + i_unit * uy));
    }
    (dz, dzb)
}

fn signed_mode(k: usize, t: usize) -> i64 {
    if k <= t / 2 {
        k as i64
    } else {
        k as i64 - t as i64
    }
}

/// `samples[t]` holds u(·, θ_t) on the grid nodes, θ_t = 2πt/T. Modes with
/// |n| ≤ `window` are kept; energy beyond 10⁻⁸ outside is an error.
pub fn fourier_mode_check(
    grid: &Grid,
    field: &PotentialField,
    samples: &[Vec<Complex64>],
    window: usize,
) -> Result<FourierCheck> {
    let t_len = samples.len();
    if t_len < 2 {
        return Err(Error::InvalidParams(
            "need at least two angular samples".into(),
        ));
    }
    for s in samples {
        if s.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: s.len(),
            });
        }
    }
    let h2 = grid.h() * grid.h();
    let dth = 2.0 * PI / t_len as f64;
    let psi_z: Vec<Complex64> = grid
        .pos
        .iter()
        .map(|&z| field.grad(z).map(|g| 0.5 * Complex64::new(g[0], -g[1])))
        .collect::<Result<_>>()?;

    // modes[k][node]
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t_len);
    let mut modes = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; t_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); t_len];
    for node in 0..grid.len() {
        for (t, s) in samples.iter().enumerate() {
            buf[t] = s[node];
        }
        fft.process(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            modes[k][node] = v / t_len as f64;
        }
    }

    let norm_sq = dth
        * h2
        * samples
            .iter()
            .flat_map(|s| s.iter())
            .map(|v| v.norm_sqr())
            .sum::<f64>();
    let mode_energy: Vec<f64> = modes
        .iter()
        .map(|m| 2.0 * PI * h2 * m.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .collect();
    let mode_sum: f64 = mode_energy.iter().sum();
    let parseval_residual = (norm_sq - mode_sum).abs() / norm_sq.max(f64::MIN_POSITIVE);
    let outside: f64 = mode_energy
        .iter()
        .enumerate()
        .filter(|(k, _)| signed_mode(*k, t_len).unsigned_abs() as usize > window)
        .map(|(_, e)| e)
        .sum();
    let outside_energy = outside / mode_sum.max(f64::MIN_POSITIVE);
    if outside_energy > 1e-8 {
        return Err(Error::BandLimitViolated(outside_energy));
    }

    let i_unit = Complex64::new(0.0, 1.0);
    let mut form_direct = 0.0;
    for t in 0..t_len {
        let u = &samples[t];
        let next = &samples[(t + 1) % t_len];
        let (dz, dzb) = complex_derivatives(grid, u);
        for k in 0..grid.len() {
            let dth_u = (next[k] - u[k]) / dth;
            let lu = -dz[k] - i_unit * psi_z[k] * dth_u;
            let lbu = dzb[k] - i_unit * psi_z[k].conj() * dth_u;
            form_direct += lu.norm_sqr() + lbu.norm_sqr();
        }
    }
    form_direct *= dth * h2;

    let mut form_modes = 0.0;
    for (k, m) in modes.iter().enumerate() {
        if mode_energy[k] == 0.0 {
            continue;
        }
        let n = signed_mode(k, t_len) as f64;
        let (dz, dzb) = complex_derivatives(grid, m);
        for q in 0..grid.len() {
            let lu = -dz[q] + n * psi_z[q] * m[q];
            let lbu = dzb[q] + n * psi_z[q].conj() * m[q];
            form_modes += lu.norm_sqr() + lbu.norm_sqr();
        }
    }
    form_modes *= 2.0 * PI * h2;
    let form_residual = (form_direct - form_modes).abs() / form_modes.max(f64::MIN_POSITIVE);
    Ok(FourierCheck {
        norm_sq,
        parseval_residual,
        form_direct,
        form_modes,
        form_residual,
        outside_energy,
    })
}
