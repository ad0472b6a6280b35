//! The normalized radial bump h(t) = c0·e^{−1/(1−t)} and the radial
//! integrals needed for the Newtonian potential of a bump charge.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::quad::{adaptive_simpson, gauss64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub c0: f64,
}

fn e_bump(t: f64) -> f64 {
    if (0.0..1.0).contains(&t) {
        (-1.0 / (1.0 - t)).exp()
    } else {
        0.0
    }
}

/// c0 = (2π ∫₀¹ e^{−1/(1−r)} r dr)^{−1} by adaptive quadrature.
pub fn normalize_bump() -> BumpProfile {
    let i = adaptive_simpson(&|r: f64| e_bump(r) * r, 0.0, 1.0, 1e-17);
    BumpProfile {
        c0: 1.0 / (2.0 * PI * i),
    }
}

/// Shared instance; the constant is computed once.
pub fn bump() -> &'static BumpProfile {
    static B: OnceLock<BumpProfile> = OnceLock::new();
    B.get_or_init(normalize_bump)
}

const LOG_CUTOFF: f64 = 1e-12;

impl BumpProfile {
    /// h(t) for t ≥ 0.
    pub fn eval(&self, t: f64) -> f64 {
        self.c0 * e_bump(t)
    }

    /// Fraction of the unit mass inside radius t: 2π∫₀^t h(τ)τ dτ.
    pub fn mass(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let c = 2.0 * PI * self.c0;
        if t <= 0.5 {
            c * gauss64().integrate(0.0, t, |s| e_bump(s) * s)
        } else {
            1.0 - c * gauss64().integrate(t, 1.0, |s| e_bump(s) * s)
        }
    }

    /// 2π∫_t^1 h(τ) τ log τ dτ.
    pub fn log_moment(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let c = 2.0 * PI * self.c0;
        let g = gauss64();
        let mut s = 0.0;
        let mid = t.max(0.5);
        s += g.integrate(mid, 1.0, |x| e_bump(x) * x * x.ln());
        if t < 0.5 {
            // τ = e^u removes the logarithmic behaviour at small τ
            let lo = t.max(LOG_CUTOFF).ln();
            s += g.integrate(lo, 0.5f64.ln(), |u| {
                let x = u.exp();
                e_bump(x) * x * x * u
            });
        }
        c * s
    }

    /// Potential of a unit-flux charge of unit radius at distance t:
    /// log t outside, F(t) log t + G(t) inside.
    pub fn potential(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return t.ln();
        }
        let head = if t > 0.0 { self.mass(t) * t.ln() } else { 0.0 };
        head + self.log_moment(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c0_value() {
        assert!((bump().c0 - 4.101557353326229).abs() < 1e-11);
    }

    #[test]
    fn endpoint_values() {
        let b = bump();
        assert_eq!(b.eval(1.0), 0.0);
        assert!((b.eval(0.0) - b.c0 * (-1f64).exp()).abs() < 1e-15);
        assert_eq!(b.mass(1.0), 1.0);
    }

    #[test]
    fn mass_continuous_at_split_and_one() {
        let b = bump();
        assert!((b.mass(0.5 - 1e-12) - b.mass(0.5 + 1e-12)).abs() < 1e-11);
        assert!((b.mass(1.0 - 1e-9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn potential_continuous_at_support() {
        let b = bump();
        assert!((b.potential(1.0 - 1e-10) - b.potential(1.0)).abs() < 1e-9);
        assert!(b.potential(0.0).is_finite());
    }
}
