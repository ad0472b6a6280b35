use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Disk;
use crate::potential::PotentialField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mask {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        r_in: f64,
        r_out: f64,
    },
    DiskMinusDisks {
        outer: Disk,
        holes: Vec<Disk>,
    },
    /// Flags over candidate nodes, row-major.
    Bitmap {
        bits: Vec<bool>,
    },
    Box,
}

impl Mask {
    pub fn disk(radius: f64) -> Self {
        Mask::Disk {
            center: [0.0, 0.0],
            radius,
        }
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Self {
        Mask::Annulus {
            center: [0.0, 0.0],
            r_in,
            r_out,
        }
    }

    fn contains(&self, z: Complex64, flat: usize) -> bool {
        match self {
            Mask::Disk { center, radius } => {
                (z - Complex64::new(center[0], center[1])).norm() < *radius
            }
            Mask::Annulus {
                center,
                r_in,
                r_out,
            } => {
                let r = (z - Complex64::new(center[0], center[1])).norm();
                *r_in < r && r < *r_out
            }
            Mask::DiskMinusDisks { outer, holes } => {
                outer.contains(z) && holes.iter().all(|d| (z - d.center).norm() > d.radius)
            }
            Mask::Bitmap { bits } => bits.get(flat).copied().unwrap_or(false),
            Mask::Box => true,
        }
    }
}

/// Uniform grid over [x_min, x_min + nx·h] × [y_min, y_min + ny·h].
/// Aligned grids put candidate nodes at the interior lattice points
/// (the bounding box itself is Dirichlet boundary); offset grids put them at
/// cell centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub y_min: f64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub offset: bool,
    pub mask: Mask,
}

impl GridSpec {
    /// Square [−L, L]² split into `cells` cells per side.
    pub fn square(half_width: f64, cells: usize, offset: bool, mask: Mask) -> Self {
        let h = 2.0 * half_width / cells as f64;
        Self {
            x_min: -half_width,
            y_min: -half_width,
            nx: cells,
            ny: cells,
            h,
            offset,
            mask,
        }
    }

    pub fn unit_disk(cells: usize, offset: bool) -> Self {
        Self::square(1.0, cells, offset, Mask::disk(1.0))
    }

    pub fn candidate_dims(&self) -> (usize, usize) {
        if self.offset {
            (self.nx, self.ny)
        } else {
            (self.nx.saturating_sub(1), self.ny.saturating_sub(1))
        }
    }

    pub fn candidate_pos(&self, i: usize, j: usize) -> Complex64 {
        let s = if self.offset { 0.5 } else { 1.0 };
        Complex64::new(
            self.x_min + (i as f64 + s) * self.h,
            self.y_min + (j as f64 + s) * self.h,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Right,
    Up,
}

/// Interior edge a → b with a < b in node order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub dir: Dir,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    /// Candidate indices (i, j) of interior nodes, row-major.
    pub nodes: Vec<(usize, usize)>,
    pub pos: Vec<Complex64>,
    pub edges: Vec<Edge>,
    /// Neighbors omitted by the Dirichlet condition, per node.
    pub missing: Vec<u8>,
    index: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Grid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }

    /// Node index of candidate (i, j), if interior.
    pub fn node_at(&self, i: i64, j: i64) -> Option<usize> {
        let (cx, cy) = self.spec.candidate_dims();
        if i < 0 || j < 0 || i as usize >= cx || j as usize >= cy {
            return None;
        }
        let v = self.index[j as usize * cx + i as usize];
        (v != NONE).then_some(v as usize)
    }

    /// Midpoint of an edge.
    pub fn edge_mid(&self, e: &Edge) -> Complex64 {
        0.5 * (self.pos[e.a as usize] + self.pos[e.b as usize])
    }

    /// Fails if any node or edge midpoint lies within h/4 of a point-flux center.
    pub fn validate_point_fluxes(&self, field: &PotentialField) -> Result<()> {
        let tol = 0.25 * self.h();
        for (c, _) in field.point_fluxes() {
            let near = |z: Complex64| (z - c).norm() < tol;
            if self.pos.iter().any(|&z| near(z)) {
                return Err(Error::GridSingularity(format!(
                    "node within h/4 of point flux at ({}, {})",
                    c.re, c.im
                )));
            }
            if self.edges.iter().any(|e| near(self.edge_mid(e))) {
                return Err(Error::GridSingularity(format!(
                    "edge midpoint within h/4 of point flux at ({}, {})",
                    c.re, c.im
                )));
            }
        }
        Ok(())
    }
}

pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    if !(spec.h > 0.0 && spec.h.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "grid spacing {} must be positive",
            spec.h
        )));
    }
    let (cx, cy) = spec.candidate_dims();
    if let Mask::Bitmap { bits } = &spec.mask {
        if bits.len() != cx * cy {
            return Err(Error::DimensionMismatch {
                expected: cx * cy,
                found: bits.len(),
            });
        }
    }
    let mut index = vec![NONE; cx * cy];
    let mut nodes = Vec::new();
    let mut pos = Vec::new();
    for j in 0..cy {
        for i in 0..cx {
            let z = spec.candidate_pos(i, j);
            if spec.mask.contains(z, j * cx + i) {
                index[j * cx + i] = nodes.len() as u32;
                nodes.push((i, j));
                pos.push(z);
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut edges = Vec::new();
    let mut missing = vec![0u8; nodes.len()];
    let at = |i: usize, j: usize| -> u32 {
        if i < cx && j < cy {
            index[j * cx + i]
        } else {
            NONE
        }
    };
    for (a, &(i, j)) in nodes.iter().enumerate() {
        let r = at(i + 1, j);
        if r != NONE {
            edges.push(Edge {
                a: a as u32,
                b: r,
                dir: Dir::Right,
            });
        }
        let u = at(i, j + 1);
        if u != NONE {
            edges.push(Edge {
                a: a as u32,
                b: u,
                dir: Dir::Up,
            });
        }
        let l = if i > 0 { at(i - 1, j) } else { NONE };
        let d = if j > 0 { at(i, j - 1) } else { NONE };
        missing[a] = [r, u, l, d].iter().filter(|&&x| x == NONE).count() as u8;
    }
    Ok(Grid {
        spec: spec.clone(),
        nodes,
        pos,
        edges,
        missing,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let spec = GridSpec::square(1.0, 2, false, Mask::Box);
        let g = build_grid(&spec).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.missing[0], 4);
    }

    #[test]
    fn bbox_below_one_cell_is_empty() {
        let spec = GridSpec {
            x_min: 0.0,
            y_min: 0.0,
            nx: 1,
            ny: 1,
            h: 1.0,
            offset: false,
            mask: Mask::Box,
        };
        assert!(matches!(build_grid(&spec), Err(Error::EmptyGrid)));
    }

    #[test]
    fn degenerate_annulus_is_empty() {
        let spec = GridSpec::square(1.0, 32, true, Mask::annulus(0.5, 0.5));
        assert!(matches!(build_grid(&spec), Err(Error::EmptyGrid)));
    }

    #[test]
    fn edges_point_up_the_order() {
        let g = build_grid(&GridSpec::unit_disk(16, false)).unwrap();
        assert!(g.edges.iter().all(|e| e.a < e.b));
    }
}
