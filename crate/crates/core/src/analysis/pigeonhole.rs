use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

use super::winding::dist_to_integers;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collision {
    pub first: u64,
    pub second: u64,
    /// second − first.
    pub n: u64,
    pub max_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PigeonholeResult {
    /// Smallest multiple of `step` up to N with every n·w_i within ε of ℤ.
    pub n: u64,
    pub max_dist: f64,
    pub candidates_scanned: u64,
    pub step: u64,
    /// First repeated cube among the points m·step·w mod 1.
    pub collision: Option<Collision>,
    /// Whether the counting argument guarantees success.
    pub guaranteed: bool,
}

pub fn max_dist(fluxes: &[f64], n: u64) -> f64 {
    fluxes
        .iter()
        .map(|w| dist_to_integers(n as f64 * w))
        .fold(0.0, f64::max)
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Pigeonhole on the M-torus: cubes of side 1/⌈1/ε⌉, points m·step·w for m = 0, 1, ….
pub fn cube_collision(fluxes: &[f64], n_max: u64, epsilon: f64, step: u64) -> Option<Collision> {
    let c = (1.0 / epsilon).ceil();
    let mut seen: HashMap<Vec<i64>, u64> = HashMap::new();
    let mut m = 0u64;
    while m * step <= n_max {
        let n = m * step;
        let key: Vec<i64> = fluxes
            .iter()
            .map(|w| ((frac(n as f64 * w) * c).floor() as i64).min(c as i64 - 1))
            .collect();
        if let Some(&first) = seen.get(&key) {
            let d = n - first;
            return Some(Collision {
                first,
                second: n,
                n: d,
                max_dist: max_dist(fluxes, d),
            });
        }
        seen.insert(key, n);
        m += 1;
    }
    None
}

/// Smallest multiple of `step` in [step, N] with max_i ‖n·w_i‖_* ≤ ε, by scan,
/// alongside the cube-collision witness.
pub fn pigeonhole_search(
    fluxes: &[f64],
    n_max: u64,
    epsilon: f64,
    step: u64,
) -> Result<PigeonholeResult> {
    if step == 0 || n_max < 2 * step {
        return Err(Error::InvalidParams(format!(
            "need N >= 2·step, got N = {n_max}, step = {step}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParams(format!(
            "epsilon {epsilon} must lie in (0, 1/2)"
        )));
    }
    if fluxes.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParams("fluxes must be finite".into()));
    }
    let cells = (1.0 / epsilon).ceil();
    let guaranteed = (1.0 + cells).powi(fluxes.len() as i32) < n_max as f64 / (2.0 * step as f64);
    let collision = cube_collision(fluxes, n_max, epsilon, step);
    let mut scanned = 0;
    let mut n = step;
    while n <= n_max {
        scanned += 1;
        let d = max_dist(fluxes, n);
        if d <= epsilon {
            return Ok(PigeonholeResult {
                n,
                max_dist: d,
                candidates_scanned: scanned,
                step,
                collision,
                guaranteed,
            });
        }
        n += step;
    }
    if guaranteed {
        Err(Error::GuaranteeViolated)
    } else {
        Err(Error::NotFound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter() {
        let r = pigeonhole_search(&[0.25], 8, 0.1, 1).unwrap();
        assert_eq!(r.n, 4);
        assert_eq!(r.max_dist, 0.0);
    }

    #[test]
    fn third_and_sixth() {
        let r = pigeonhole_search(&[1.0 / 3.0, 1.0 / 6.0], 8, 0.01, 1).unwrap();
        assert_eq!(r.n, 6);
        assert!(r.max_dist < 1e-12);
    }

    #[test]
    fn step_respected() {
        let r = pigeonhole_search(&[0.5], 64, 0.1, 4).unwrap();
        assert_eq!(r.n, 4);
        assert_eq!(r.n % r.step, 0);
    }

    #[test]
    fn not_found_without_guarantee() {
        let r = pigeonhole_search(&[std::f64::consts::FRAC_1_SQRT_2], 4, 0.01, 1);
        assert!(matches!(r, Err(Error::NotFound)));
    }
}
