use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{AnalyticTerm, PotentialField, RadialCharge};
use crate::quad::{adaptive_simpson, gauss64};

/// Distance from x to the nearest integer.
pub fn dist_to_integers(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// (2π)^{-1}∮(−φ_y dx + φ_x dy) over the circle, trapezoid rule with m points.
/// The field must be harmonic on the circle.
pub fn winding_line(
    field: &PotentialField,
    center: Complex64,
    radius: f64,
    m: usize,
) -> Result<f64> {
    if m < 16 {
        return Err(Error::InvalidParams(format!(
            "need at least 16 quadrature points, got {m}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(
            "circle radius must be positive".into(),
        ));
    }
    let mut sum = 0.0;
    for j in 0..m {
        let th = 2.0 * PI * j as f64 / m as f64;
        let dir = Complex64::new(th.cos(), th.sin());
        let z = center + radius * dir;
        if field.laplacian(z) != 0.0 {
            return Err(Error::SingularOnCircle);
        }
        let g = field.grad(z).map_err(|_| Error::SingularOnCircle)?;
        if !(g[0].is_finite() && g[1].is_finite()) {
            return Err(Error::SingularOnCircle);
        }
        sum += radius * (g[0] * dir.re + g[1] * dir.im);
    }
    Ok(sum / m as f64)
}

fn charge_flux_in_disk(c: &RadialCharge, center: Complex64, radius: f64) -> f64 {
    let d = (c.center - center).norm();
    let rho = c.rho;
    if d + rho <= radius {
        return c.mu_f64();
    }
    if d >= radius + rho {
        return 0.0;
    }
    // flux through the part of each circle |z − c| = r that lies in the disk
    let angle = |r: f64| -> f64 {
        if r <= radius - d {
            return 2.0 * PI;
        }
        if d == 0.0 {
            return if r < radius { 2.0 * PI } else { 0.0 };
        }
        let cosv = (r * r + d * d - radius * radius) / (2.0 * r * d);
        2.0 * cosv.clamp(-1.0, 1.0).acos()
    };
    let integrand = |r: f64| c.density(r) * r * angle(r) / (2.0 * PI);
    let lo = (d - radius).max(0.0);
    let hi = rho.min(d + radius);
    let mut breaks = vec![lo];
    for k in [(d - radius).abs(), d + radius] {
        if k > lo && k < hi {
            breaks.push(k);
        }
    }
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(&integrand, w[0], w[1], 1e-13 * c.mu_f64().abs().max(1e-300)))
        .sum()
}

fn smooth_terms_flux(smooth: Vec<AnalyticTerm>, center: Complex64, radius: f64) -> f64 {
    if smooth.is_empty() {
        return 0.0;
    }
    let f = PotentialField::new(Vec::new(), smooth);
    let n_theta = 256;
    let g = gauss64();
    let per_ring = |r: f64| -> f64 {
        let s: f64 = (0..n_theta)
            .map(|j| {
                let th = 2.0 * PI * (j as f64 + 0.5) / n_theta as f64;
                f.laplacian(center + Complex64::from_polar(r, th))
            })
            .sum();
        s * r * 2.0 * PI / n_theta as f64
    };
    let panels: Vec<f64> = (0..=16).map(|i| radius * i as f64 / 16.0).collect();
    g.integrate_panels(&panels, per_ring) / (2.0 * PI)
}

/// (2π)^{-1}∫Δφ over the disk; exact per charge from the enclosed-mass profile,
/// point fluxes counted when strictly inside, other terms by polar quadrature.
pub fn winding_flux(field: &PotentialField, center: Complex64, radius: f64) -> f64 {
    let mut total: f64 = field
        .charges
        .iter()
        .map(|c| charge_flux_in_disk(c, center, radius))
        .sum();
    let mut rest = Vec::new();
    for t in &field.terms {
        match t {
            // the window is identically 1 on the disk
            AnalyticTerm::Windowed { inner, window } if center.norm() + radius <= window.inner => {
                total += winding_flux(inner, center, radius)
            }
            AnalyticTerm::Windowed { .. } | AnalyticTerm::Extension(_) => rest.push(t.clone()),
            AnalyticTerm::CounterCharge(c) => total += charge_flux_in_disk(c, center, radius),
            AnalyticTerm::PointFlux { center: c, alpha } => {
                if (c - center).norm() < radius {
                    total += crate::potential::flux_f64(alpha);
                }
            }
        }
    }
    total + smooth_terms_flux(rest, center, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::flux_from_f64;

    fn charge(x: f64, y: f64, rho: f64, mu: f64) -> RadialCharge {
        RadialCharge::new(Complex64::new(x, y), rho, flux_from_f64(mu).unwrap()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist_to_integers(0.25), 0.25);
        assert_eq!(dist_to_integers(-3.0), 0.0);
        assert!((dist_to_integers(-0.7) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn point_flux_line_integral() {
        let f = PotentialField::point_flux(Complex64::new(0.0, 0.0), flux_from_f64(0.375).unwrap());
        for r in [0.1, 0.5, 2.0] {
            assert!(
                (winding_line(&f, Complex64::new(0.01, -0.02), r, 64).unwrap() - 0.375).abs()
                    < 1e-10
            );
        }
        assert!(winding_line(&f, Complex64::new(0.0, 0.0), 0.5, 8).is_err());
    }

    #[test]
    fn charge_fully_enclosed() {
        let f = PotentialField::new(vec![charge(0.1, 0.0, 0.05, 0.25)], vec![]);
        assert!(
            (winding_line(&f, Complex64::new(0.1, 0.0), 0.1, 64).unwrap() - 0.25).abs() < 1e-12
        );
        assert!((winding_flux(&f, Complex64::new(0.0, 0.0), 0.5) - 0.25).abs() < 1e-12);
        assert_eq!(winding_flux(&f, Complex64::new(0.9, 0.0), 0.1), 0.0);
        assert!(matches!(
            winding_line(&f, Complex64::new(0.1, 0.0), 0.03, 64),
            Err(Error::SingularOnCircle)
        ));
    }

    #[test]
    fn partial_overlap_matches_midpoint_oracle() {
        let c = charge(0.3, 0.1, 0.2, 0.5);
        let f = PotentialField::new(vec![c.clone()], vec![]);
        let (center, radius) = (Complex64::new(0.0, 0.0), 0.35);
        let exact = winding_flux(&f, center, radius);
        // 1025² midpoint samples over the charge's bounding box
        let n = 1025;
        let h = 2.0 * c.rho / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let z = c.center
                    + Complex64::new(-c.rho + (i as f64 + 0.5) * h, -c.rho + (j as f64 + 0.5) * h);
                if (z - center).norm() < radius {
                    sum += f.laplacian(z);
                }
            }
        }
        let oracle = sum * h * h / (2.0 * PI);
        assert!(exact > 0.0 && exact < 0.5);
        assert!((exact - oracle).abs() < 2e-4, "{exact} vs {oracle}");
    }
}
