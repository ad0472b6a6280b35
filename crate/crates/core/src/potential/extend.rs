//! Extension of a potential on the unit disk to a potential on B(0, 2) that
//! blows up at |z| = 2: ψ = φ·χ₁(|z|) + χ₂(|z|).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss64;

use super::field::{AnalyticTerm, PotentialField};

fn f_exp(x: f64) -> (f64, f64, f64) {
    // e^{-1/x} and its first two derivatives, zero for x ≤ 0
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / x).exp();
    let x2 = x * x;
    (f, f / x2, f * (1.0 - 2.0 * x) / (x2 * x2))
}

/// C^∞ step from 0 (x ≤ 0) to 1 (x ≥ 1), with first and second derivatives.
pub fn smooth_step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (f, f1, f2) = f_exp(x);
    let (g, mg1, g2) = f_exp(1.0 - x);
    let g1 = -mg1;
    let d = f + g;
    let d1 = f1 + g1;
    let n = f1 * g - f * g1;
    let n1 = f2 * g - f * g2;
    (f / d, n / (d * d), (n1 * d - 2.0 * n * d1) / (d * d * d))
}

/// Bump on (0, 1) with peak value 1 at x = 1/2.
pub fn bump01(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    (4.0 - 1.0 / x - 1.0 / (1.0 - x)).exp()
}

/// Bump on (0, 1) whose left edge decays like e^{-1/√x}; unlike e^{-1/x} it
/// stays representable at x ~ 1e-4.
fn slow_bump01(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    (2.0 - 1.0 / x.sqrt() - 1.0 / (1.0 - x)).exp()
}

/// χ₁: 1 on t ≤ inner, 0 on t ≥ outer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chi1 {
    pub inner: f64,
    pub outer: f64,
}

impl Default for Chi1 {
    fn default() -> Self {
        Self {
            inner: 4.0 / 3.0,
            outer: 1.5,
        }
    }
}

impl Chi1 {
    /// Value, first and second derivative in t.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let w = self.outer - self.inner;
        let (s, s1, s2) = smooth_step((t - self.inner) / w);
        (1.0 - s, -s1 / w, -s2 / (w * w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chi2Params {
    /// Peak of the extra curvature added where χ₁ switches off.
    pub boost: f64,
    /// Beyond this radius χ₂ = −½log(4 − t²) + const.
    pub t_star: f64,
    /// Where the logarithmic curvature starts to switch on.
    #[serde(default = "default_ramp_start")]
    pub ramp_start: f64,
}

fn default_ramp_start() -> f64 {
    1.98
}

impl Default for Chi2Params {
    fn default() -> Self {
        Self {
            boost: 150.0,
            t_star: 1.998,
            ramp_start: default_ramp_start(),
        }
    }
}

/// χ₂ built from its second derivative
///   q = boost·b(on [1.3, 1.45]) + c1·b(on [1, t*]) + S(on [ramp_start, t*])·g'',
/// g = −½log(4 − t²); c1 is fixed so that χ₂' = g' from t* on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2 {
    pub params: Chi2Params,
    pub c1: f64,
    pub offset: f64,
}

const K0: f64 = 1.0;
// support of the boost bump; it peaks where χ₁'' is most negative
const K1: f64 = 1.3;
const K2: f64 = 1.45;

fn g0(t: f64) -> f64 {
    -0.5 * (4.0 - t * t).ln()
}

fn g1(t: f64) -> f64 {
    t / (4.0 - t * t)
}

fn g2(t: f64) -> f64 {
    let d = 4.0 - t * t;
    (4.0 + t * t) / (d * d)
}

impl Chi2 {
    pub fn new(params: Chi2Params) -> Result<Self> {
        if !(params.t_star > 1.5 && params.t_star < 2.0) {
            return Err(Error::InvalidParams(format!(
                "t_star = {} must lie in (3/2, 2)",
                params.t_star
            )));
        }
        if !(params.ramp_start >= 1.5 && params.ramp_start < params.t_star) {
            return Err(Error::InvalidParams(format!(
                "ramp_start = {} must lie in [3/2, t_star)",
                params.ramp_start
            )));
        }
        if !(params.boost >= 0.0) {
            return Err(Error::InvalidParams("boost must be non-negative".into()));
        }
        let mut c = Self {
            params,
            c1: 0.0,
            offset: 0.0,
        };
        let ts = params.t_star;
        let i2 = gauss64()
            .integrate_panels(&[K0, K1, K2, params.ramp_start, params.t_star], |s| c.b2(s));
        let rest = c.q(K0, ts, true);
        let c1 = (g1(ts) - rest) / i2;
        if c1 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "boost {} leaves no room to match the logarithmic tail (filler weight {c1:.3e} < 0)",
                params.boost
            )));
        }
        c.c1 = c1;
        let (v, _) = c.integrals(ts);
        c.offset = v - g0(ts);
        Ok(c)
    }

    fn b1(&self, s: f64) -> f64 {
        bump01((s - K1) / (K2 - K1))
    }

    fn b2(&self, s: f64) -> f64 {
        slow_bump01((s - K0) / (self.params.t_star - K0))
    }

    fn ramp(&self, s: f64) -> f64 {
        smooth_step((s - self.params.ramp_start) / (self.params.t_star - self.params.ramp_start)).0
    }

    fn q_at(&self, s: f64) -> f64 {
        self.params.boost * self.b1(s) + self.c1 * self.b2(s) + self.ramp(s) * g2(s)
    }

    /// ∫_a^b q, optionally without the filler term.
    fn q(&self, a: f64, b: f64, skip_filler: bool) -> f64 {
        let f = |s: f64| {
            let base = self.params.boost * self.b1(s) + self.ramp(s) * g2(s);
            if skip_filler {
                base
            } else {
                base + self.c1 * self.b2(s)
            }
        };
        let knots = [K0, K1, K2, self.params.ramp_start, self.params.t_star];
        let mut pts = vec![a];
        pts.extend(knots.iter().copied().filter(|&k| k > a && k < b));
        pts.push(b);
        gauss64().integrate_panels(&pts, f)
    }

    /// (χ₂(t), χ₂'(t)) for 1 ≤ t ≤ t*.
    fn integrals(&self, t: f64) -> (f64, f64) {
        let knots = [K0, K1, K2, self.params.ramp_start, self.params.t_star];
        let mut pts = vec![K0];
        pts.extend(knots.iter().copied().filter(|&k| k > K0 && k < t));
        pts.push(t);
        let g = gauss64();
        let d1 = g.integrate_panels(&pts, |s| self.q_at(s));
        let d0 = g.integrate_panels(&pts, |s| (t - s) * self.q_at(s));
        (d0, d1)
    }

    /// Value and first two derivatives in t.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t <= K0 {
            return (0.0, 0.0, 0.0);
        }
        if t >= 2.0 {
            return (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        }
        if t >= self.params.t_star {
            return (g0(t) + self.offset, g1(t), g2(t));
        }
        let (v, d) = self.integrals(t);
        (v, d, self.q_at(t))
    }
}

/// ψ = φ·χ₁(|z|) + χ₂(|z|), validated for Δψ > 0 on a 129² sample grid over 1 < |z| < 2.
pub fn extend_to_psi(
    field: &PotentialField,
    chi1: Chi1,
    chi2: Chi2Params,
) -> Result<PotentialField> {
    if !(chi1.inner >= 1.0 && chi1.outer > chi1.inner && chi1.outer < 2.0) {
        return Err(Error::InvalidParams(
            "chi1 knots must satisfy 1 <= inner < outer < 2".into(),
        ));
    }
    let chi2 = Chi2::new(chi2)?;
    let psi = PotentialField::new(
        Vec::new(),
        vec![
            AnalyticTerm::Windowed {
                inner: Box::new(field.clone()),
                window: chi1,
            },
            AnalyticTerm::Extension(chi2),
        ],
    );
    let n = 129;
    let h = 4.0 / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            let z = Complex64::new(-2.0 + i as f64 * h, -2.0 + j as f64 * h);
            let r = z.norm();
            if r <= 1.0 || r >= 2.0 {
                continue;
            }
            let lap = psi.laplacian(z);
            if !(lap > 0.0) {
                return Err(Error::NotSubharmonic {
                    radius: r,
                    value: lap,
                });
            }
        }
    }
    Ok(psi)
}
