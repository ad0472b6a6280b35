use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialField;

/// Per-region winding numbers (2π)^{-1}∫Δψ, in region-id order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxVector {
    pub ids: Vec<usize>,
    pub fluxes: Vec<f64>,
}

impl FluxVector {
    pub fn new(ids: Vec<usize>, fluxes: Vec<f64>) -> Result<Self> {
        if ids.len() != fluxes.len() {
            return Err(Error::DimensionMismatch {
                expected: ids.len(),
                found: fluxes.len(),
            });
        }
        if fluxes.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidParams("flux entries must be finite".into()));
        }
        Ok(Self { ids, fluxes })
    }

    pub fn len(&self) -> usize {
        self.fluxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fluxes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub id: usize,
    pub cells: usize,
    pub area: f64,
    pub max_lap: f64,
    pub flux: f64,
    pub dangerous: bool,
}

/// Components of {Δφ > 0} on a rectangular sample grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentLabeling {
    pub nx: usize,
    pub ny: usize,
    /// 0 outside the support, otherwise component id + 1; row-major, y outer.
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
    /// Number of dangerous components.
    pub m: usize,
}

impl ComponentLabeling {
    pub fn flux_vector(&self, dangerous_only: bool) -> FluxVector {
        let picked: Vec<&Component> = self
            .components
            .iter()
            .filter(|c| c.dangerous || !dangerous_only)
            .collect();
        FluxVector {
            ids: picked.iter().map(|c| c.id).collect(),
            fluxes: picked.iter().map(|c| c.flux).collect(),
        }
    }
}

/// Samples Δφ at (x_min + i·h, y_min + j·h), row-major with y outer.
pub fn sample_laplacian(
    field: &PotentialField,
    x_min: f64,
    y_min: f64,
    nx: usize,
    ny: usize,
    h: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(field.laplacian(Complex64::new(x_min + i as f64 * h, y_min + j as f64 * h)));
        }
    }
    out
}

/// 4-connected flood fill of the positive samples. Components are numbered in
/// scan order of their first cell.
pub fn label_components(
    values: &[f64],
    nx: usize,
    ny: usize,
    h: f64,
    threshold: f64,
) -> Result<ComponentLabeling> {
    if values.len() != nx * ny {
        return Err(Error::DimensionMismatch {
            expected: nx * ny,
            found: values.len(),
        });
    }
    if !(threshold >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "threshold {threshold} must be non-negative"
        )));
    }
    let mut labels = vec![0u32; values.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..values.len() {
        if !(values[start] > 0.0) || labels[start] != 0 {
            continue;
        }
        let id = components.len();
        labels[start] = id as u32 + 1;
        queue.push_back(start);
        let (mut cells, mut sum, mut max) = (0usize, 0.0, f64::NEG_INFINITY);
        while let Some(p) = queue.pop_front() {
            cells += 1;
            sum += values[p];
            max = max.max(values[p]);
            let (i, j) = (p % nx, p / nx);
            let mut push = |q: usize| {
                if values[q] > 0.0 && labels[q] == 0 {
                    labels[q] = id as u32 + 1;
                    queue.push_back(q);
                }
            };
            if i > 0 {
                push(p - 1);
            }
            if i + 1 < nx {
                push(p + 1);
            }
            if j > 0 {
                push(p - nx);
            }
            if j + 1 < ny {
                push(p + nx);
            }
        }
        components.push(Component {
            id,
            cells,
            area: cells as f64 * h * h,
            max_lap: max,
            flux: sum * h * h / (2.0 * PI),
            dangerous: max >= threshold,
        });
    }
    let m = components.iter().filter(|c| c.dangerous).count();
    Ok(ComponentLabeling {
        nx,
        ny,
        labels,
        components,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_field_has_no_components() {
        let l = label_components(&[0.0; 12], 4, 3, 0.1, 0.0).unwrap();
        assert!(l.components.is_empty());
        assert_eq!(l.m, 0);
    }

    #[test]
    fn diagonal_cells_are_separate() {
        let v = [1.0, 0.0, 0.0, 2.0];
        let l = label_components(&v, 2, 2, 1.0, 1.5).unwrap();
        assert_eq!(l.components.len(), 2);
        assert_eq!(l.m, 1);
        assert_eq!(l.flux_vector(true).ids, vec![1]);
    }
}
