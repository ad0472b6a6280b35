use num_complex::Complex64;

use crate::error::Result;
use crate::potential::{PhaseQuadrature, PotentialField};

use super::grid::{Dir, Grid};

/// Per-edge link angles θ_e = −∫_e A·dl at unit coupling; U_e = e^{i n θ_e}.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPhaseField {
    pub angles: Vec<f64>,
    pub quadrature: PhaseQuadrature,
}

impl LinkPhaseField {
    pub fn trivial(edges: usize) -> Self {
        Self {
            angles: vec![0.0; edges],
            quadrature: PhaseQuadrature::Exact,
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn phase(&self, e: usize, n: i64) -> Complex64 {
        Complex64::from_polar(1.0, n as f64 * self.angles[e])
    }

    /// Counterclockwise angle sum around every plaquette whose four edges are
    /// interior, keyed by the candidate index of its lower-left node.
    pub fn plaquette_angles(&self, grid: &Grid) -> Vec<((usize, usize), f64)> {
        let n = grid.len();
        let mut right = vec![usize::MAX; n];
        let mut up = vec![usize::MAX; n];
        for (k, e) in grid.edges.iter().enumerate() {
            match e.dir {
                Dir::Right => right[e.a as usize] = k,
                Dir::Up => up[e.a as usize] = k,
            }
        }
        let mut out = Vec::new();
        for (a, &(i, j)) in grid.nodes.iter().enumerate() {
            let (Some(r), Some(u)) = (
                grid.node_at(i as i64 + 1, j as i64),
                grid.node_at(i as i64, j as i64 + 1),
            ) else {
                continue;
            };
            let (bottom, left, rside, top) = (right[a], up[a], up[r], right[u]);
            if [bottom, left, rside, top].contains(&usize::MAX) {
                continue;
            }
            let s = self.angles[bottom] + self.angles[rside] - self.angles[top] - self.angles[left];
            out.push(((i, j), s));
        }
        out
    }
}

pub fn link_phases(
    grid: &Grid,
    field: &PotentialField,
    quad: PhaseQuadrature,
) -> Result<LinkPhaseField> {
    if field.is_zero() {
        return Ok(LinkPhaseField {
            angles: vec![0.0; grid.edges.len()],
            quadrature: quad,
        });
    }
    grid.validate_point_fluxes(field)?;
    let mut angles = Vec::with_capacity(grid.edges.len());
    for e in &grid.edges {
        let a = grid.pos[e.a as usize];
        let b = grid.pos[e.b as usize];
        angles.push(-field.edge_integral(a, b, quad)?);
    }
    Ok(LinkPhaseField {
        angles,
        quadrature: quad,
    })
}
