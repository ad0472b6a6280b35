//! Trial functions F_k = (1 − |z|²)·min_{l≤k, j} clamp(f^l_j, 0, 1) with
//! f^l_j = log(|z − z^l_j|/ρ_l) / log(ε_l²/(4ρ_l)).

use num_complex::Complex64;

use crate::discretize::{Dir, Grid};
use crate::geometry::{DiskIndex, Generation};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFunction {
    pub k: usize,
    pub samples: Vec<f64>,
    pub norm_l2: f64,
    pub norm_grad_l2: f64,
    pub sup_norm: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Zone {
    Removed,
    Ramp,
    Free,
}

struct Evaluator<'a> {
    index: DiskIndex,
    gens: &'a [Generation],
    k: usize,
}

impl Evaluator<'_> {
    /// Value, directional derivatives of the active factor, and its zone.
    fn eval(&self, z: Complex64) -> (f64, [f64; 2], Zone) {
        let r2 = z.norm_sqr();
        if r2 >= 1.0 {
            return (0.0, [0.0, 0.0], Zone::Removed);
        }
        let outer = 1.0 - r2;
        let mut m = 1.0;
        let mut dm = [0.0, 0.0];
        let mut zone = Zone::Free;
        for g in &self.gens[..self.k] {
            let Some((j, d)) = self.index.nearest(g.k, z) else {
                continue;
            };
            let rim = g.cell * g.cell / 4.0;
            if d >= rim {
                continue;
            }
            let denom = (g.cell * g.cell / (4.0 * g.radius)).ln();
            let f = (d / g.radius).ln() / denom;
            let (val, dz, zz) = if f <= 0.0 {
                (0.0, [0.0, 0.0], Zone::Removed)
            } else {
                let w = z - g.centers[j];
                let s = 1.0 / (denom * d * d);
                (f, [s * w.re, s * w.im], Zone::Ramp)
            };
            if val < m {
                m = val;
                dm = dz;
                zone = zz;
            }
        }
        let grad = [
            -2.0 * z.re * m + outer * dm[0],
            -2.0 * z.im * m + outer * dm[1],
        ];
        (outer * m, grad, zone)
    }
}

/// Samples F_k on the grid nodes and integrates its L² norm and, by finite
/// differences over every edge touching the grid, the L² norm of its gradient.
/// Differences across a disk rim take the larger one-sided slope.
pub fn trial_f(gens: &[Generation], k: usize, grid: &Grid) -> TrialFunction {
    let k = k.min(gens.len());
    let ev = Evaluator {
        index: DiskIndex::new(gens),
        gens,
        k,
    };
    let h = grid.h();
    let vals: Vec<(f64, [f64; 2], Zone)> = grid.pos.iter().map(|&z| ev.eval(z)).collect();
    let samples: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let norm_l2 = (samples.iter().map(|v| v * v).sum::<f64>() * h * h).sqrt();
    let sup_norm = samples.iter().copied().fold(0.0, f64::max);

    let slope = |a: (f64, [f64; 2], Zone), b: (f64, [f64; 2], Zone), axis: usize| -> f64 {
        let secant = (b.0 - a.0) / h;
        if a.2 != b.2 {
            secant.abs().max(a.1[axis].abs()).max(b.1[axis].abs())
        } else {
            secant.abs()
        }
    };
    let mut grad2 = 0.0;
    for e in &grid.edges {
        let axis = if e.dir == Dir::Right { 0 } else { 1 };
        let s = slope(vals[e.a as usize], vals[e.b as usize], axis);
        grad2 += s * s;
    }
    // edges leaving the node set towards dropped neighbours
    for (a, &(i, j)) in grid.nodes.iter().enumerate() {
        if grid.missing[a] == 0 {
            continue;
        }
        for (di, dj, axis) in [(1i64, 0i64, 0usize), (-1, 0, 0), (0, 1, 1), (0, -1, 1)] {
            if grid.node_at(i as i64 + di, j as i64 + dj).is_some() {
                continue;
            }
            let z = grid.pos[a] + Complex64::new(di as f64 * h, dj as f64 * h);
            let s = slope(vals[a], ev.eval(z), axis);
            grad2 += s * s;
        }
    }
    TrialFunction {
        k,
        samples,
        norm_l2,
        norm_grad_l2: (grad2 * h * h).sqrt(),
        sup_norm,
    }
}

/// (1 − |z|²) on the grid nodes; the trial function with no disks removed.
pub fn trial_free(grid: &Grid) -> Vec<f64> {
    grid.pos
        .iter()
        .map(|z| (1.0 - z.norm_sqr()).max(0.0))
        .collect()
}
