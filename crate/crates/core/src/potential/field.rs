//! Potentials as sums of radial bump charges and closed-form terms, with
//! evaluators for φ, ∇φ, Δφ and line integrals of A = (−φ_y, φ_x).

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Float, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss16, gauss64, GaussRule};

use super::bump::bump;
use super::extend::{Chi1, Chi2, Chi2Params};

/// Flux in winding units, (2π)^{-1}∫Δφ, kept as an exact rational.
pub type Flux = Ratio<i128>;

pub fn flux_f64(f: &Flux) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// Exact conversion of a finite double (always a dyadic rational).
pub fn flux_from_f64(x: f64) -> Result<Flux> {
    if !x.is_finite() {
        return Err(Error::InvalidParams(format!("flux {x} is not finite")));
    }
    if x == 0.0 {
        return Ok(Flux::zero());
    }
    let (mant, exp, sign) = Float::integer_decode(x);
    let mut num = mant as i128 * sign as i128;
    let mut exp = exp as i32;
    while exp < 0 && num % 2 == 0 {
        num /= 2;
        exp += 1;
    }
    if exp >= 0 {
        if exp > 60 {
            return Err(Error::InvalidParams(format!("flux {x} too large")));
        }
        Ok(Flux::from_integer(num << exp))
    } else if -exp <= 125 {
        Ok(Flux::new(num, 1i128 << (-exp)))
    } else {
        Err(Error::InvalidParams(format!(
            "flux {x} too small to represent exactly"
        )))
    }
}

fn parse_flux(s: &str) -> Result<Flux> {
    s.trim()
        .parse::<Flux>()
        .map_err(|_| Error::Parse(format!("bad rational flux {s:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointEval {
    pub phi: f64,
    pub grad: [f64; 2],
    pub lap: f64,
}

impl PointEval {
    fn add(&mut self, o: PointEval) {
        self.phi += o.phi;
        self.grad[0] += o.grad[0];
        self.grad[1] += o.grad[1];
        self.lap += o.lap;
    }
}

/// Newtonian potential of the density 2π·mu·rho^{-2}·h(|z − center|/rho).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCharge {
    pub center: Complex64,
    pub rho: f64,
    pub mu: Flux,
}

impl RadialCharge {
    pub fn new(center: Complex64, rho: f64, mu: Flux) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::InvalidParams(format!(
                "charge flux {mu} must be positive"
            )));
        }
        Self::signed(center, rho, mu)
    }

    /// Charge of either sign, used for counter-charges.
    pub fn signed(center: Complex64, rho: f64, mu: Flux) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "charge radius {rho} must be positive"
            )));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidParams("charge center must be finite".into()));
        }
        Ok(Self { center, rho, mu })
    }

    pub fn mu_f64(&self) -> f64 {
        flux_f64(&self.mu)
    }

    /// Δφ at distance r from the center.
    pub fn density(&self, r: f64) -> f64 {
        2.0 * PI * self.mu_f64() / (self.rho * self.rho) * bump().eval(r / self.rho)
    }

    /// Flux enclosed by the circle of radius r about the center.
    pub fn flux_within(&self, r: f64) -> f64 {
        self.mu_f64() * bump().mass(r / self.rho)
    }
}

pub fn charge_eval(charge: &RadialCharge, z: Complex64) -> PointEval {
    kernel_eval(charge.center, charge.rho, charge.mu_f64(), z)
}

fn kernel_eval(c: Complex64, rho: f64, mu: f64, z: Complex64) -> PointEval {
    let d = z - c;
    let r = d.norm();
    let b = bump();
    if r >= rho {
        let r2 = r * r;
        return PointEval {
            phi: mu * r.ln(),
            grad: [mu * d.re / r2, mu * d.im / r2],
            lap: 0.0,
        };
    }
    let t = r / rho;
    let phi = mu * (rho.ln() + b.potential(t));
    let grad = if r > 0.0 {
        let s = mu * b.mass(t) / (r * r);
        [s * d.re, s * d.im]
    } else {
        [0.0, 0.0]
    };
    PointEval {
        phi,
        grad,
        lap: 2.0 * PI * mu / (rho * rho) * b.eval(t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseQuadrature {
    /// A at the edge midpoint.
    Midpoint,
    /// Three-point Simpson rule along the edge.
    Simpson,
    /// Closed-form argument increments wherever a term is harmonic along the
    /// edge, Gauss rules elsewhere. Integer total flux then gauges away exactly.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticTerm {
    /// alpha·log|z − center|.
    PointFlux { center: Complex64, alpha: Flux },
    /// Signed bump charge; exempt from the positivity of Δφ.
    CounterCharge(RadialCharge),
    /// χ₂(|z|).
    Extension(Chi2),
    /// inner(z)·χ₁(|z|).
    Windowed {
        inner: Box<PotentialField>,
        window: Chi1,
    },
}

#[derive(Debug, Clone, Copy)]
struct Kernel {
    c: Complex64,
    rho: f64,
    mu: f64,
}

#[derive(Debug, Clone, Default)]
struct SupportIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl SupportIndex {
    fn build(kernels: &[Kernel]) -> Self {
        if kernels.is_empty() {
            return Self::default();
        }
        let max_rho = kernels.iter().map(|k| k.rho).fold(0.0, f64::max);
        let cell = (2.0 * max_rho).max(1e-3);
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, k) in kernels.iter().enumerate() {
            let x0 = ((k.c.re - k.rho) / cell).floor() as i64;
            let x1 = ((k.c.re + k.rho) / cell).floor() as i64;
            let y0 = ((k.c.im - k.rho) / cell).floor() as i64;
            let y1 = ((k.c.im + k.rho) / cell).floor() as i64;
            for x in x0..=x1 {
                for y in y0..=y1 {
                    buckets.entry((x, y)).or_default().push(i as u32);
                }
            }
        }
        Self { cell, buckets }
    }

    /// Kernels whose support may meet the box [lo, hi].
    fn query(&self, lo: Complex64, hi: Complex64, out: &mut Vec<u32>) {
        out.clear();
        if self.buckets.is_empty() {
            return;
        }
        let x0 = (lo.re / self.cell).floor() as i64;
        let x1 = (hi.re / self.cell).floor() as i64;
        let y0 = (lo.im / self.cell).floor() as i64;
        let y1 = (hi.im / self.cell).floor() as i64;
        for x in x0..=x1 {
            for y in y0..=y1 {
                if let Some(v) = self.buckets.get(&(x, y)) {
                    out.extend_from_slice(v);
                }
            }
        }
        if (x1 > x0) || (y1 > y0) {
            out.sort_unstable();
            out.dedup();
        }
    }
}

/// A potential φ on the plane.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub charges: Vec<RadialCharge>,
    pub terms: Vec<AnalyticTerm>,
    kernels: Vec<Kernel>,
    index: SupportIndex,
}

impl PartialEq for PotentialField {
    fn eq(&self, other: &Self) -> bool {
        self.charges == other.charges && self.terms == other.terms
    }
}

fn cross(a: [f64; 2], d: Complex64) -> f64 {
    a[0] * d.im - a[1] * d.re
}

fn arg_increment(a: Complex64, b: Complex64, c: Complex64) -> Option<f64> {
    let p = a - c;
    let q = b - c;
    let cr = p.re * q.im - p.im * q.re;
    let dt = p.re * q.re + p.im * q.im;
    if cr == 0.0 && dt <= 0.0 {
        // c lies on the segment
        return None;
    }
    Some(cr.atan2(dt))
}

fn gauss8() -> &'static GaussRule {
    static R: std::sync::OnceLock<GaussRule> = std::sync::OnceLock::new();
    R.get_or_init(|| GaussRule::new(8))
}

impl PotentialField {
    pub fn new(charges: Vec<RadialCharge>, terms: Vec<AnalyticTerm>) -> Self {
        let mut kernels: Vec<Kernel> = charges
            .iter()
            .map(|c| Kernel {
                c: c.center,
                rho: c.rho,
                mu: c.mu_f64(),
            })
            .collect();
        for t in &terms {
            if let AnalyticTerm::CounterCharge(c) = t {
                kernels.push(Kernel {
                    c: c.center,
                    rho: c.rho,
                    mu: c.mu_f64(),
                });
            }
        }
        let index = SupportIndex::build(&kernels);
        Self {
            charges,
            terms,
            kernels,
            index,
        }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn point_flux(center: Complex64, alpha: Flux) -> Self {
        Self::new(Vec::new(), vec![AnalyticTerm::PointFlux { center, alpha }])
    }

    /// Same field with extra terms appended.
    pub fn with_terms(&self, extra: impl IntoIterator<Item = AnalyticTerm>) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(extra);
        Self::new(self.charges.clone(), terms)
    }

    pub fn is_zero(&self) -> bool {
        self.charges.is_empty() && self.terms.is_empty()
    }

    /// Σ mu over charges and counter-charges plus Σ alpha over point fluxes.
    pub fn total_flux(&self) -> f64 {
        let mut s: f64 = self.kernels.iter().map(|k| k.mu).sum();
        for t in &self.terms {
            if let AnalyticTerm::PointFlux { alpha, .. } = t {
                s += flux_f64(alpha);
            }
        }
        s
    }

    /// Point-flux centers, including those inside windowed terms.
    pub fn point_fluxes(&self) -> Vec<(Complex64, f64)> {
        let mut out = Vec::new();
        for t in &self.terms {
            match t {
                AnalyticTerm::PointFlux { center, alpha } => out.push((*center, flux_f64(alpha))),
                AnalyticTerm::Windowed { inner, .. } => out.extend(inner.point_fluxes()),
                _ => {}
            }
        }
        out
    }

    /// True when Δφ ≥ 0 is expected everywhere (no point fluxes or counter-charges).
    pub fn is_plain(&self) -> bool {
        self.terms.iter().all(|t| match t {
            AnalyticTerm::PointFlux { .. } | AnalyticTerm::CounterCharge(_) => false,
            AnalyticTerm::Windowed { inner, .. } => inner.is_plain(),
            AnalyticTerm::Extension(_) => true,
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<PointEval> {
        let mut e = PointEval::default();
        for k in &self.kernels {
            e.add(kernel_eval(k.c, k.rho, k.mu, z));
        }
        for t in &self.terms {
            e.add(term_eval(t, z)?);
        }
        Ok(e)
    }

    pub fn phi(&self, z: Complex64) -> Result<f64> {
        Ok(self.eval(z)?.phi)
    }

    pub fn grad(&self, z: Complex64) -> Result<[f64; 2]> {
        Ok(self.eval(z)?.grad)
    }

    /// Δφ(z); point fluxes contribute zero.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        let mut ids = Vec::new();
        self.index.query(z, z, &mut ids);
        let mut s = 0.0;
        for &i in &ids {
            let k = &self.kernels[i as usize];
            let r = (z - k.c).norm();
            if r < k.rho {
                s += 2.0 * PI * k.mu / (k.rho * k.rho) * bump().eval(r / k.rho);
            }
        }
        for t in &self.terms {
            match t {
                AnalyticTerm::PointFlux { .. } | AnalyticTerm::CounterCharge(_) => {}
                _ => s += term_eval(t, z).map(|e| e.lap).unwrap_or(f64::NAN),
            }
        }
        s
    }

    /// ∫_a^b A·dl along the straight segment, A = (−φ_y, φ_x).
    pub fn edge_integral(&self, a: Complex64, b: Complex64, quad: PhaseQuadrature) -> Result<f64> {
        let d = b - a;
        match quad {
            PhaseQuadrature::Midpoint => Ok(cross(self.grad(0.5 * (a + b))?, d)),
            PhaseQuadrature::Simpson => {
                let ga = self.grad(a)?;
                let gm = self.grad(0.5 * (a + b))?;
                let gb = self.grad(b)?;
                Ok((cross(ga, d) + 4.0 * cross(gm, d) + cross(gb, d)) / 6.0)
            }
            PhaseQuadrature::Exact => {
                let mut s = 0.0;
                let lo = Complex64::new(a.re.min(b.re), a.im.min(b.im));
                let hi = Complex64::new(a.re.max(b.re), a.im.max(b.im));
                let mut near = Vec::new();
                self.index.query(lo, hi, &mut near);
                let mut ni = 0;
                for (i, k) in self.kernels.iter().enumerate() {
                    let touches = ni < near.len() && near[ni] as usize == i;
                    if touches {
                        ni += 1;
                        s += kernel_edge(k, a, b);
                    } else {
                        // support cannot meet the segment
                        s += k.mu * arg_increment(a, b, k.c).unwrap_or(0.0);
                    }
                }
                for t in &self.terms {
                    s += term_edge(t, a, b)?;
                }
                Ok(s)
            }
        }
    }
}

fn kernel_edge(k: &Kernel, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let p = a - k.c;
    let dd = d.norm_sqr();
    let pd = p.re * d.re + p.im * d.im;
    let disc = pd * pd - dd * (p.norm_sqr() - k.rho * k.rho);
    let whole = |s0: f64, s1: f64| -> f64 {
        let za = a + d * s0;
        let zb = a + d * s1;
        arg_increment(za, zb, k.c).unwrap_or(0.0)
    };
    if disc <= 0.0 {
        return k.mu * whole(0.0, 1.0);
    }
    let sq = disc.sqrt();
    let s_in = ((-pd - sq) / dd).max(0.0);
    let s_out = ((-pd + sq) / dd).min(1.0);
    if s_out <= s_in {
        return k.mu * whole(0.0, 1.0);
    }
    let mut s = 0.0;
    if s_in > 0.0 {
        s += whole(0.0, s_in);
    }
    if s_out < 1.0 {
        s += whole(s_out, 1.0);
    }
    let b0 = bump();
    s += gauss16().integrate(s_in, s_out, |u| {
        let w = p + d * u;
        let r2 = w.norm_sqr();
        if r2 == 0.0 {
            return 0.0;
        }
        let f = b0.mass(r2.sqrt() / k.rho);
        f * (w.re * d.im - w.im * d.re) / r2
    });
    k.mu * s
}

fn term_edge(t: &AnalyticTerm, a: Complex64, b: Complex64) -> Result<f64> {
    match t {
        AnalyticTerm::PointFlux { center, alpha } => {
            let inc = arg_increment(a, b, *center).ok_or(Error::SingularEval {
                re: center.re,
                im: center.im,
            })?;
            Ok(flux_f64(alpha) * inc)
        }
        AnalyticTerm::CounterCharge(c) => Ok(kernel_edge(
            &Kernel {
                c: c.center,
                rho: c.rho,
                mu: c.mu_f64(),
            },
            a,
            b,
        )),
        _ => {
            let d = b - a;
            let mut err = None;
            let v = gauss8().integrate(0.0, 1.0, |u| match term_eval(t, a + d * u) {
                Ok(e) => cross(e.grad, d),
                Err(x) => {
                    err = Some(x);
                    0.0
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(v),
            }
        }
    }
}

fn radial_term(z: Complex64, f: (f64, f64, f64)) -> PointEval {
    let r = z.norm();
    let (v, d1, d2) = f;
    if r == 0.0 {
        return PointEval {
            phi: v,
            grad: [0.0, 0.0],
            lap: 2.0 * d2,
        };
    }
    PointEval {
        phi: v,
        grad: [d1 * z.re / r, d1 * z.im / r],
        lap: d2 + d1 / r,
    }
}

fn term_eval(t: &AnalyticTerm, z: Complex64) -> Result<PointEval> {
    match t {
        AnalyticTerm::PointFlux { center, alpha } => {
            let d = z - center;
            let r2 = d.norm_sqr();
            if r2 == 0.0 {
                return Err(Error::SingularEval {
                    re: center.re,
                    im: center.im,
                });
            }
            let a = flux_f64(alpha);
            Ok(PointEval {
                phi: 0.5 * a * r2.ln(),
                grad: [a * d.re / r2, a * d.im / r2],
                lap: 0.0,
            })
        }
        AnalyticTerm::CounterCharge(c) => Ok(charge_eval(c, z)),
        AnalyticTerm::Extension(chi2) => Ok(radial_term(z, chi2.eval(z.norm()))),
        AnalyticTerm::Windowed { inner, window } => {
            let r = z.norm();
            if r >= window.outer {
                return Ok(PointEval::default());
            }
            let e = inner.eval(z)?;
            let (w0, w1, w2) = window.eval(r);
            if w1 == 0.0 && w2 == 0.0 {
                return Ok(PointEval {
                    phi: w0 * e.phi,
                    grad: [w0 * e.grad[0], w0 * e.grad[1]],
                    lap: w0 * e.lap,
                });
            }
            let ux = z.re / r;
            let uy = z.im / r;
            let radial = e.grad[0] * ux + e.grad[1] * uy;
            Ok(PointEval {
                phi: w0 * e.phi,
                grad: [
                    w0 * e.grad[0] + e.phi * w1 * ux,
                    w0 * e.grad[1] + e.phi * w1 * uy,
                ],
                lap: w0 * e.lap + 2.0 * w1 * radial + e.phi * (w2 + w1 / r),
            })
        }
    }
}

/// Convolution of φ with the unit-mass bump at scale delta, centered at z.
pub fn mollify(field: &PotentialField, delta: f64, z: Complex64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(
            "mollifier scale must be positive".into(),
        ));
    }
    let b = bump();
    let m = 96;
    let mut err = None;
    let v = gauss64().integrate(0.0, 1.0, |t| {
        let w = b.eval(t) * t;
        if w == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for k in 0..m {
            let th = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            match field.phi(z + Complex64::from_polar(delta * t, th)) {
                Ok(p) => s += p,
                Err(e) => err = Some(e),
            }
        }
        w * s * 2.0 * PI / m as f64
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

// ---- JSON document ----------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChargeDoc {
    center: [f64; 2],
    rho: f64,
    mu: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum TermDoc {
    PointFlux {
        center: [f64; 2],
        alpha: String,
    },
    CounterCharge {
        center: [f64; 2],
        rho: f64,
        mu: String,
    },
    Extension {
        chi2: Chi2Params,
    },
    Windowed {
        chi1: Chi1,
        field: FieldDoc,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldDoc {
    charges: Vec<ChargeDoc>,
    terms: Vec<TermDoc>,
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn to_doc(f: &PotentialField) -> FieldDoc {
    FieldDoc {
        charges: f
            .charges
            .iter()
            .map(|c| ChargeDoc {
                center: c2(c.center),
                rho: c.rho,
                mu: format!("{}/{}", c.mu.numer(), c.mu.denom()),
            })
            .collect(),
        terms: f
            .terms
            .iter()
            .map(|t| match t {
                AnalyticTerm::PointFlux { center, alpha } => TermDoc::PointFlux {
                    center: c2(*center),
                    alpha: format!("{}/{}", alpha.numer(), alpha.denom()),
                },
                AnalyticTerm::CounterCharge(c) => TermDoc::CounterCharge {
                    center: c2(c.center),
                    rho: c.rho,
                    mu: format!("{}/{}", c.mu.numer(), c.mu.denom()),
                },
                AnalyticTerm::Extension(x) => TermDoc::Extension { chi2: x.params },
                AnalyticTerm::Windowed { inner, window } => TermDoc::Windowed {
                    chi1: *window,
                    field: to_doc(inner),
                },
            })
            .collect(),
    }
}

fn from_doc(d: FieldDoc) -> Result<PotentialField> {
    let cz = |a: [f64; 2]| Complex64::new(a[0], a[1]);
    let charges = d
        .charges
        .into_iter()
        .map(|c| RadialCharge::new(cz(c.center), c.rho, parse_flux(&c.mu)?))
        .collect::<Result<Vec<_>>>()?;
    let terms = d
        .terms
        .into_iter()
        .map(|t| {
            Ok(match t {
                TermDoc::PointFlux { center, alpha } => AnalyticTerm::PointFlux {
                    center: cz(center),
                    alpha: parse_flux(&alpha)?,
                },
                TermDoc::CounterCharge { center, rho, mu } => AnalyticTerm::CounterCharge(
                    RadialCharge::signed(cz(center), rho, parse_flux(&mu)?)?,
                ),
                TermDoc::Extension { chi2 } => AnalyticTerm::Extension(Chi2::new(chi2)?),
                TermDoc::Windowed { chi1, field } => AnalyticTerm::Windowed {
                    inner: Box::new(from_doc(field)?),
                    window: chi1,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PotentialField::new(charges, terms))
}

impl PotentialField {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&to_doc(self)).expect("field document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: FieldDoc = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        from_doc(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> Flux {
        Flux::new(n, d)
    }

    #[test]
    fn flux_from_f64_is_exact() {
        for x in [0.25, -0.03, 1e-20, 3.0, 0.1] {
            let f = flux_from_f64(x).unwrap();
            assert_eq!(flux_f64(&f), x);
        }
    }

    #[test]
    fn outside_support_closed_form() {
        let c = RadialCharge::new(Complex64::new(0.1, -0.2), 0.05, q(1, 3)).unwrap();
        let z = c.center + Complex64::new(0.1, 0.0);
        let e = charge_eval(&c, z);
        assert!((e.phi - (1.0 / 3.0) * (0.1f64).ln()).abs() < 1e-15);
        assert_eq!(e.lap, 0.0);
    }

    #[test]
    fn point_flux_singular() {
        let f = PotentialField::point_flux(Complex64::new(0.0, 0.0), q(1, 2));
        assert!(matches!(
            f.eval(Complex64::new(0.0, 0.0)),
            Err(Error::SingularEval { .. })
        ));
    }

    #[test]
    fn exact_edge_matches_fine_quadrature() {
        let c = RadialCharge::new(Complex64::new(0.0, 0.0), 0.3, q(3, 8)).unwrap();
        let f = PotentialField::new(vec![c], vec![]);
        let a = Complex64::new(-0.4, 0.1);
        let b = Complex64::new(0.5, 0.12);
        let ex = f.edge_integral(a, b, PhaseQuadrature::Exact).unwrap();
        let n = 20000;
        let d = b - a;
        let mut s = 0.0;
        for i in 0..n {
            let z = a + d * ((i as f64 + 0.5) / n as f64);
            s += cross(f.grad(z).unwrap(), d) / n as f64;
        }
        assert!((ex - s).abs() < 1e-7, "{ex} vs {s}");
    }

    #[test]
    fn json_round_trip() {
        let f = PotentialField::new(
            vec![
                RadialCharge::new(Complex64::new(0.125, -0.375), 1.0 / 512.0, q(1, 1 << 64))
                    .unwrap(),
            ],
            vec![AnalyticTerm::PointFlux {
                center: Complex64::new(0.3, 0.1),
                alpha: q(5, 7),
            }],
        );
        let back = PotentialField::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
    }
}
