//! The coupling sweep n ↦ (λ^e_{nφ}, λ^m_{nφ}, trial bound, exceptional flag).

use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::discretize::{assemble_electric, assemble_magnetic, link_phases, Grid, LinkPhaseField};
use crate::eigensolve::{lowest_eigenpair_with, rayleigh_quotient, EigenOptions};
use crate::error::{Error, Result};
use crate::potential::{
    dist_to_integers_exact, flux_f64, AnalyticTerm, Flux, PhaseQuadrature, PotentialField,
};

/// ε(n) = min(k^{-3}, 1/5) with k = ⌊log₂ n⌋ + 1.
pub fn exceptional_epsilon(n: u64) -> f64 {
    let k = if n == 0 {
        1
    } else {
        64 - n.leading_zeros() as u64
    };
    (k as f64).powi(-3).min(0.2)
}

/// Everything a row needs; built once per field and grid.
#[derive(Debug, Clone)]
pub struct ProfileSetup {
    pub grid: Grid,
    pub field: PotentialField,
    pub phases: LinkPhaseField,
    /// Trial function samples on the grid nodes.
    pub trial: Vec<f64>,
    /// Fluxes of the dangerous regions, one per charge.
    pub region_fluxes: Vec<Flux>,
    /// Overrides [`exceptional_epsilon`].
    pub epsilon: Option<f64>,
    pub eig: EigenOptions,
}

impl ProfileSetup {
    pub fn new(
        grid: Grid,
        field: PotentialField,
        trial: Vec<f64>,
        eig: EigenOptions,
    ) -> Result<Self> {
        if trial.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: trial.len(),
            });
        }
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact)?;
        let mut region_fluxes: Vec<Flux> = field.charges.iter().map(|c| c.mu).collect();
        for t in &field.terms {
            match t {
                AnalyticTerm::CounterCharge(c) => region_fluxes.push(c.mu),
                AnalyticTerm::PointFlux { alpha, .. } => region_fluxes.push(*alpha),
                _ => {}
            }
        }
        Ok(Self {
            grid,
            field,
            phases,
            trial,
            region_fluxes,
            epsilon: None,
            eig,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub n: u64,
    pub lambda_e: f64,
    pub lambda_m: f64,
    pub trial_upper_bound: f64,
    pub exceptional: bool,
    /// max over regions of ‖n·w_i‖_*, exact.
    pub max_dist: f64,
    pub epsilon: f64,
    pub residual_e: f64,
    pub residual_m: f64,
    pub iterations_e: usize,
    pub iterations_m: usize,
    pub converged: bool,
    pub error: Option<String>,
}

impl ProfileRow {
    pub fn flagged(&self) -> bool {
        !self.converged || self.error.is_some()
    }
}

pub fn profile_row(setup: &ProfileSetup, n: u64) -> ProfileRow {
    let max_dist = setup
        .region_fluxes
        .iter()
        .map(|mu| dist_to_integers_exact(n as u128, mu))
        .fold(Flux::zero(), |a, b| if b > a { b } else { a });
    let max_dist = flux_f64(&max_dist);
    let epsilon = setup.epsilon.unwrap_or_else(|| exceptional_epsilon(n));
    let mut row = ProfileRow {
        n,
        lambda_e: f64::NAN,
        lambda_m: f64::NAN,
        trial_upper_bound: f64::NAN,
        exceptional: max_dist <= epsilon,
        max_dist,
        epsilon,
        residual_e: f64::NAN,
        residual_m: f64::NAN,
        iterations_e: 0,
        iterations_m: 0,
        converged: false,
        error: None,
    };
    let run = |row: &mut ProfileRow| -> Result<()> {
        let coupling = i64::try_from(n)
            .map_err(|_| Error::InvalidParams(format!("coupling {n} too large")))?;
        let electric = assemble_electric(&setup.grid, &setup.field, coupling)?;
        let magnetic = assemble_magnetic(&setup.grid, &setup.phases, &setup.field, coupling)?;
        let trial: Vec<Complex64> = setup
            .trial
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        row.trial_upper_bound = rayleigh_quotient(&electric, &trial)?;
        let e = lowest_eigenpair_with(&electric, &setup.eig)?;
        let m = lowest_eigenpair_with(&magnetic, &setup.eig)?;
        row.lambda_e = e.lambda;
        row.lambda_m = m.lambda;
        row.residual_e = e.residual;
        row.residual_m = m.residual;
        row.iterations_e = e.iterations;
        row.iterations_m = m.iterations;
        row.converged = e.converged && m.converged;
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.error = Some(e.to_string());
    }
    row
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactnessProfile {
    pub rows: Vec<ProfileRow>,
    pub h: f64,
    pub nodes: usize,
    pub edges: usize,
    pub tol: f64,
}

impl CompactnessProfile {
    pub const CSV_HEADER: &'static str = "n,lambda_e,lambda_m,trial_upper_bound,exceptional,max_dist,epsilon,residual_e,residual_m,converged,error";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.6e},{:.3e},{:.3e},{},{}",
                r.n,
                r.lambda_e,
                r.lambda_m,
                r.trial_upper_bound,
                r.exceptional,
                r.max_dist,
                r.epsilon,
                r.residual_e,
                r.residual_m,
                r.converged,
                r.error.as_deref().unwrap_or("").replace(',', ";")
            );
        }
        s
    }
}

/// Rows in order, sequentially; a failing row is flagged and the sweep continues.
pub fn compactness_profile(setup: &ProfileSetup, n_list: &[u64]) -> Result<CompactnessProfile> {
    if n_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams(
            "n_list must be sorted ascending".into(),
        ));
    }
    Ok(CompactnessProfile {
        rows: n_list.iter().map(|&n| profile_row(setup, n)).collect(),
        h: setup.grid.h(),
        nodes: setup.grid.len(),
        edges: setup.grid.edges.len(),
        tol: setup.eig.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_schedule() {
        assert_eq!(exceptional_epsilon(1), 0.2);
        assert_eq!(exceptional_epsilon(4), 1.0 / 27.0);
        assert_eq!(exceptional_epsilon(7), 1.0 / 27.0);
        assert_eq!(exceptional_epsilon(8), 1.0 / 64.0);
    }
}
