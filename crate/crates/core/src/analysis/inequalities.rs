//! Discrete checks of the Kato, annulus, periodic, Poincaré and twistor
//! inequalities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::discretize::{
    assemble_magnetic, assemble_periodic_1d, assemble_radial_with, build_grid, link_phases,
    potential_values, Grid, GridSpec, LinkPhaseField, Mask,
};
use crate::eigensolve::{lowest_eigenpair_with, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::potential::{flux_f64, Flux, PhaseQuadrature, PotentialField};

use super::winding::dist_to_integers;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// lhs = ‖∇|u|‖² (with dropped neighbours as zeros), rhs = ⟨(H − V)u, u⟩, both
/// scaled by the cell area.
pub fn kato_check(
    grid: &Grid,
    field: &PotentialField,
    n: i64,
    u: &[Complex64],
) -> Result<InequalityCheck> {
    let phases = link_phases(grid, field, PhaseQuadrature::Exact)?;
    kato_check_with(grid, &phases, field, n, u)
}

/// Same as [`kato_check`] with precomputed link phases.
pub fn kato_check_with(
    grid: &Grid,
    phases: &LinkPhaseField,
    field: &PotentialField,
    n: i64,
    u: &[Complex64],
) -> Result<InequalityCheck> {
    if u.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: u.len(),
        });
    }
    let h2 = grid.h() * grid.h();
    let op = assemble_magnetic(grid, phases, field, n)?;
    let v = potential_values(grid, field, n);
    let pot: f64 = v.iter().zip(u).map(|(v, x)| v * x.norm_sqr()).sum();
    let rhs = (op.quadratic_form(u) - pot) * h2;
    let mut lhs: f64 = grid
        .edges
        .iter()
        .map(|e| (u[e.a as usize].norm() - u[e.b as usize].norm()).powi(2))
        .sum();
    lhs += grid
        .missing
        .iter()
        .zip(u)
        .map(|(&m, x)| m as f64 * x.norm_sqr())
        .sum::<f64>();
    Ok(InequalityCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-9 * rhs.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoincareDomain {
    Disk { radius: f64 },
    Annulus { r_in: f64, r_out: f64 },
}

/// Values on a polar tensor grid: radii ascending and including both ends of
/// the domain, `n_theta` equally spaced angles; row-major with radius outer.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSamples {
    pub radii: Vec<f64>,
    pub n_theta: usize,
    pub values: Vec<Complex64>,
}

impl PolarSamples {
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(
        r0: f64,
        r1: f64,
        m_r: usize,
        n_theta: usize,
        f: F,
    ) -> Self {
        let radii: Vec<f64> = (0..=m_r)
            .map(|i| r0 + (r1 - r0) * i as f64 / m_r as f64)
            .collect();
        let mut values = Vec::with_capacity(radii.len() * n_theta);
        for &r in &radii {
            for j in 0..n_theta {
                values.push(f(r, 2.0 * PI * j as f64 / n_theta as f64));
            }
        }
        Self {
            radii,
            n_theta,
            values,
        }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + (j % self.n_theta)].norm()
    }
}

/// Trapezoid integrals of |u|² and |∇|u||² over the polar grid, plus the
/// angular integrals of |u|² on the inner and outer circles.
fn polar_integrals(s: &PolarSamples) -> (f64, f64, f64, f64) {
    let m = s.radii.len();
    let nt = s.n_theta;
    let dth = 2.0 * PI / nt as f64;
    let ring = |i: usize| -> f64 { (0..nt).map(|j| s.at(i, j).powi(2)).sum::<f64>() * dth };
    let mut mass = 0.0;
    for i in 0..m - 1 {
        let (r0, r1) = (s.radii[i], s.radii[i + 1]);
        mass += 0.5 * (r1 - r0) * (r0 * ring(i) + r1 * ring(i + 1));
    }
    // |∇|u||² cell by cell: radial difference and angular difference at the cell centre
    let mut grad = 0.0;
    for i in 0..m - 1 {
        let (r0, r1) = (s.radii[i], s.radii[i + 1]);
        let dr = r1 - r0;
        let rc = 0.5 * (r0 + r1);
        for j in 0..nt {
            let a =
                0.5 * (s.at(i + 1, j) + s.at(i + 1, j + 1)) - 0.5 * (s.at(i, j) + s.at(i, j + 1));
            let b =
                0.5 * (s.at(i, j + 1) + s.at(i + 1, j + 1)) - 0.5 * (s.at(i, j) + s.at(i + 1, j));
            let gr = a / dr;
            let gt = b / (rc * dth);
            grad += (gr * gr + gt * gt) * rc * dr * dth;
        }
    }
    (mass, grad, ring(0), ring(m - 1))
}

/// Poincaré-type inequalities on a disk (boundary term on the outer circle)
/// or an annulus (boundary term on the inner circle).
pub fn poincare_check(samples: &PolarSamples, domain: PoincareDomain) -> Result<InequalityCheck> {
    if samples.radii.len() < 2 || samples.n_theta < 3 {
        return Err(Error::InvalidParams("polar sample grid too small".into()));
    }
    if samples.values.len() != samples.radii.len() * samples.n_theta {
        return Err(Error::DimensionMismatch {
            expected: samples.radii.len() * samples.n_theta,
            found: samples.values.len(),
        });
    }
    let first = samples.radii[0];
    let last = *samples.radii.last().unwrap();
    let (mass, grad, inner, outer) = polar_integrals(samples);
    let rhs = match domain {
        PoincareDomain::Disk { radius } => {
            if first != 0.0 || (last - radius).abs() > 1e-12 * radius {
                return Err(Error::InvalidRange("disk samples must span [0, R]".into()));
            }
            radius * radius * (2.0 * grad + outer)
        }
        PoincareDomain::Annulus { r_in, r_out } => {
            if !(r_in > 0.0 && r_out > r_in)
                || (first - r_in).abs() > 1e-12
                || (last - r_out).abs() > 1e-12
            {
                return Err(Error::InvalidRange(
                    "annulus samples must span [r, R] with 0 < r < R".into(),
                ));
            }
            let a = r_out * r_out - r_in * r_in;
            a * (r_out / r_in).ln() * grad + a * inner
        }
    };
    Ok(InequalityCheck {
        lhs: mass,
        rhs,
        pass: mass <= rhs * (1.0 + 1e-6) + 1e-9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistorResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// |LHS − RHS| of
///   ∫a|Lu|² = ∫(2aψ_{zz̄} − a_{zz̄})|u|² + a|L̄u|² + 2Re∫u a_z conj(Lu)
/// with ψ = nφ, L = −∂_z + ψ_z, L̄ = ∂_z̄ + ψ_z̄, forward differences.
/// Both samples must vanish near the grid boundary.
pub fn twistor_residual(
    a: &[f64],
    u: &[Complex64],
    field: &PotentialField,
    n: i64,
    grid: &Grid,
) -> Result<TwistorResidual> {
    let len = grid.len();
    for found in [a.len(), u.len()] {
        if found != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found,
            });
        }
    }
    let h = grid.h();
    let i_unit = Complex64::new(0.0, 1.0);
    let nf = n as f64;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (k, &(i, j)) in grid.nodes.iter().enumerate() {
        let nb = |di: i64, dj: i64| grid.node_at(i as i64 + di, j as i64 + dj);
        let uv = |q: Option<usize>| q.map_or(Complex64::new(0.0, 0.0), |q| u[q]);
        let av = |q: Option<usize>| q.map_or(0.0, |q| a[q]);
        let ux = (uv(nb(1, 0)) - u[k]) / h;
        let uy = (uv(nb(0, 1)) - u[k]) / h;
        let ax = (av(nb(1, 0)) - a[k]) / h;
        let ay = (av(nb(0, 1)) - a[k]) / h;
        let lap_a =
            (av(nb(1, 0)) + av(nb(-1, 0)) + av(nb(0, 1)) + av(nb(0, -1)) - 4.0 * a[k]) / (h * h);
        let uz = 0.5 * (ux - i_unit * uy);
        let uzb = 0.5 * (ux + i_unit * uy);
        let az = 0.5 * Complex64::new(ax, -ay);
        let e = field.eval(grid.pos[k])?;
        let psi_z = 0.5 * nf * Complex64::new(e.grad[0], -e.grad[1]);
        let psi_zzb = 0.25 * nf * e.lap;
        let lu = -uz + psi_z * u[k];
        let lbu = uzb + psi_z.conj() * u[k];
        lhs += a[k] * lu.norm_sqr();
        rhs += (2.0 * a[k] * psi_zzb - 0.25 * lap_a) * u[k].norm_sqr()
            + a[k] * lbu.norm_sqr()
            + 2.0 * (u[k] * az * lu.conj()).re;
    }
    lhs *= h * h;
    rhs *= h * h;
    Ok(TwistorResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicCheck {
    pub winding: f64,
    pub smin: f64,
    pub bound: f64,
    /// smin / bound; +∞ when the bound is zero.
    pub ratio: f64,
    pub pass: bool,
}

/// Smallest singular value of d/ds + ih against 4‖w‖_*/ρ.
pub fn periodic_winding_check(h: &[f64], rho: f64) -> Result<PeriodicCheck> {
    let op = assemble_periodic_1d(h, rho)?;
    let winding = op.winding();
    let smin = op.smallest_singular_value();
    let bound = 4.0 * dist_to_integers(winding) / rho;
    let ratio = if bound > 0.0 {
        smin / bound
    } else {
        f64::INFINITY
    };
    Ok(PeriodicCheck {
        winding,
        smin,
        bound,
        ratio,
        pass: smin >= bound * (1.0 - 1e-3),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbAnnulusResult {
    pub alpha: f64,
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    /// First-order Richardson value 2·fine − coarse.
    pub lambda_m: f64,
    pub lower_bound: f64,
    pub oracle: f64,
    /// max(0, lower_bound − lambda_fine).
    pub defect: f64,
    pub oracle_rel_err: f64,
    pub converged: bool,
    pub pass: bool,
}

/// Lowest eigenpair of the magnetic operator for a point flux α at the origin
/// on the annulus r_in < |z| < r_out, offset grid with `cells` cells across.
pub fn annulus_lambda(
    r_in: f64,
    r_out: f64,
    alpha: Flux,
    cells: usize,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    if !(r_in > 0.0 && r_out > r_in) {
        return Err(Error::InvalidRange(format!(
            "need 0 < r_in < r_out, got ({r_in}, {r_out})"
        )));
    }
    let grid = build_grid(&GridSpec::square(
        r_out,
        cells,
        true,
        Mask::annulus(r_in, r_out),
    ))?;
    let field = PotentialField::point_flux(Complex64::new(0.0, 0.0), alpha);
    let phases = link_phases(&grid, &field, PhaseQuadrature::Exact)?;
    let op = assemble_magnetic(&grid, &phases, &field, 1)?;
    lowest_eigenpair_with(&op, opts)
}

/// min over angular orders k ∈ [−8, 8] of the radial ground state with ν = |k − α|.
pub fn annulus_radial_oracle(r_in: f64, r_out: f64, alpha: f64, m: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for k in -8i32..=8 {
        let nu = (k as f64 - alpha).abs();
        let a = assemble_radial_with(r_in, r_out, m, |_| nu, |_| 0.0)?.lowest();
        let b = assemble_radial_with(r_in, r_out, 2 * m, |_| nu, |_| 0.0)?.lowest();
        best = best.min((4.0 * b - a) / 3.0);
    }
    Ok(best)
}

/// Annulus lower bound ‖α‖_*²/r_out² and radial-oracle agreement, from solves
/// at `cells` and `2·cells`.
pub fn ab_annulus_check(
    r_in: f64,
    r_out: f64,
    alpha: Flux,
    cells: usize,
    opts: &EigenOptions,
) -> Result<AbAnnulusResult> {
    let coarse = annulus_lambda(r_in, r_out, alpha, cells, opts)?;
    let fine = annulus_lambda(r_in, r_out, alpha, 2 * cells, opts)?;
    let a = flux_f64(&alpha);
    let lambda_m = 2.0 * fine.lambda - coarse.lambda;
    let lower_bound = dist_to_integers(a).powi(2) / (r_out * r_out);
    let oracle = annulus_radial_oracle(r_in, r_out, a, 512)?;
    let defect = (lower_bound - fine.lambda).max(0.0);
    let oracle_rel_err = (lambda_m - oracle).abs() / oracle;
    let pass = defect <= 0.05 * lower_bound && oracle_rel_err <= 0.02;
    Ok(AbAnnulusResult {
        alpha: a,
        lambda_coarse: coarse.lambda,
        lambda_fine: fine.lambda,
        lambda_m,
        lower_bound,
        oracle,
        defect,
        oracle_rel_err,
        converged: coarse.converged && fine.converged,
        pass,
    })
}
