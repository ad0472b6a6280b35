use num_rational::Ratio;
use serde::Serialize;

use crate::discretize::HermitianOperator;
use crate::eigensolve::{lowest_eigenpair_with, EigenOptions};
use crate::error::{Error, Result};
use crate::geometry::Disk;
use crate::potential::{flux_from_f64, AnalyticTerm, Flux, RadialCharge};

/// Counter-charges making each region's coupled flux n·w_i an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCorrection {
    /// One entry per region with a nonzero defect, in coupled units.
    pub charges: Vec<(usize, RadialCharge)>,
    /// n·w_i − round(n·w_i).
    pub defects: Vec<f64>,
    pub corrected: Vec<f64>,
    /// 2π·Σ|defect|.
    pub l1_mass: f64,
}

impl GaugeCorrection {
    /// The counter-charges as terms of the uncoupled potential φ (flux divided by n).
    pub fn as_terms(&self, n: i64) -> Result<Vec<AnalyticTerm>> {
        if n == 0 {
            return Err(Error::InvalidParams("coupling must be nonzero".into()));
        }
        self.charges
            .iter()
            .map(|(_, c)| {
                let mu: Flux = c.mu / Ratio::from_integer(n as i128);
                Ok(AnalyticTerm::CounterCharge(RadialCharge::signed(
                    c.center, c.rho, mu,
                )?))
            })
            .collect()
    }
}

/// `fluxes` are coupled fluxes n·w_i of the regions; each counter-charge sits
/// at the region centre with half the region radius.
pub fn gauge_correction(
    fluxes: &[f64],
    regions: &[Disk],
    epsilon_target: f64,
    h: f64,
) -> Result<GaugeCorrection> {
    if fluxes.len() != regions.len() {
        return Err(Error::DimensionMismatch {
            expected: regions.len(),
            found: fluxes.len(),
        });
    }
    let mut charges = Vec::new();
    let mut defects = Vec::with_capacity(fluxes.len());
    let mut corrected = Vec::with_capacity(fluxes.len());
    for (i, (&w, region)) in fluxes.iter().zip(regions).enumerate() {
        let defect = w - w.round();
        if defect.abs() > epsilon_target {
            return Err(Error::InvalidParams(format!(
                "region {i}: defect {defect:.3e} exceeds target {epsilon_target:.3e}"
            )));
        }
        defects.push(defect);
        corrected.push(w.round());
        if defect == 0.0 {
            continue;
        }
        let radius = 0.5 * region.radius;
        if radius < 2.0 * h {
            return Err(Error::RegionTooSmall(i));
        }
        charges.push((
            i,
            RadialCharge::signed(region.center, radius, flux_from_f64(-defect)?)?,
        ));
    }
    let l1_mass = 2.0 * std::f64::consts::PI * defects.iter().map(|d| d.abs()).sum::<f64>();
    Ok(GaugeCorrection {
        charges,
        defects,
        corrected,
        l1_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeCheck {
    pub lambda: f64,
    pub lambda_conjugated: f64,
    /// |Δλ| / max(1, |λ|).
    pub deviation: f64,
}

/// Re-solves after conjugation by diag(e^{iθ}).
pub fn gauge_invariance_check(
    op: &HermitianOperator,
    theta: &[f64],
    opts: &EigenOptions,
) -> Result<GaugeCheck> {
    let conj = op.conjugated(theta)?;
    let a = lowest_eigenpair_with(op, opts)?;
    let b = lowest_eigenpair_with(&conj, opts)?;
    Ok(GaugeCheck {
        lambda: a.lambda,
        lambda_conjugated: b.lambda,
        deviation: (a.lambda - b.lambda).abs() / a.lambda.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_defect_needs_nothing() {
        let r = gauge_correction(
            &[3.0],
            &[Disk::new(Complex64::new(0.0, 0.0), 0.2)],
            0.05,
            0.01,
        )
        .unwrap();
        assert!(r.charges.is_empty());
        assert_eq!(r.l1_mass, 0.0);
    }

    #[test]
    fn single_defect() {
        let r = gauge_correction(
            &[2.03],
            &[Disk::new(Complex64::new(0.1, 0.0), 0.2)],
            0.05,
            0.01,
        )
        .unwrap();
        assert_eq!(r.charges.len(), 1);
        assert!((r.charges[0].1.mu_f64() + 0.03).abs() < 1e-12);
        assert_eq!(r.corrected, vec![2.0]);
    }

    #[test]
    fn tiny_region_rejected() {
        let r = gauge_correction(
            &[0.01],
            &[Disk::new(Complex64::new(0.0, 0.0), 0.01)],
            0.05,
            0.01,
        );
        assert!(matches!(r, Err(Error::RegionTooSmall(0))));
    }
}
