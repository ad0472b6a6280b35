use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialField;

use super::grid::Grid;
use super::phases::LinkPhaseField;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorMeta {
    pub h: f64,
    pub potential: String,
    pub magnetic: bool,
    pub coupling: i64,
    /// Boundary treatment; exterior neighbors are dropped (first-order accurate).
    pub dirichlet: String,
}

impl OperatorMeta {
    pub fn plain(h: f64) -> Self {
        Self {
            h,
            potential: "none".into(),
            magnetic: false,
            coupling: 0,
            dirichlet: "omission".into(),
        }
    }
}

/// Sparse Hermitian matrix stored as its diagonal plus upper-triangle entries;
/// the lower triangle is the mirrored conjugate.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    pub dim: usize,
    pub diag: Vec<f64>,
    pub upper: Vec<(u32, u32, Complex64)>,
    pub meta: OperatorMeta,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl HermitianOperator {
    pub fn from_parts(
        dim: usize,
        diag: Vec<f64>,
        upper: Vec<(u32, u32, Complex64)>,
        meta: OperatorMeta,
    ) -> Self {
        assert_eq!(diag.len(), dim);
        let mut count = vec![0usize; dim + 1];
        for &(a, b, _) in &upper {
            assert!(
                a < b && (b as usize) < dim,
                "upper entries need row < col < dim"
            );
            count[a as usize + 1] += 1;
            count[b as usize + 1] += 1;
        }
        for i in 0..dim {
            count[i + 1] += count[i];
        }
        let row_ptr = count.clone();
        let mut fill = count;
        let nnz = row_ptr[dim];
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![Complex64::new(0.0, 0.0); nnz];
        for &(a, b, v) in &upper {
            let p = fill[a as usize];
            cols[p] = b;
            vals[p] = v;
            fill[a as usize] += 1;
            let q = fill[b as usize];
            cols[q] = a;
            vals[q] = v.conj();
            fill[b as usize] += 1;
        }
        Self {
            dim,
            diag,
            upper,
            meta,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(d: Vec<f64>) -> Self {
        let n = d.len();
        Self::from_parts(n, d, Vec::new(), OperatorMeta::plain(1.0))
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let diag = (0..n).map(|i| m[(i, i)].re).collect();
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    upper.push((i as u32, j as u32, m[(i, j)]));
                }
            }
        }
        Self::from_parts(n, diag, upper, OperatorMeta::plain(1.0))
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.dim {
            let mut s = x[i] * self.diag[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[p] * x[self.cols[p] as usize];
            }
            y[i] = s;
        }
    }

    /// ⟨Hx, x⟩ (real for Hermitian H).
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn gershgorin_floor(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let off: f64 = (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|p| self.vals[p].norm())
                    .sum();
                self.diag[i] - off
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_real(&self) -> bool {
        self.upper.iter().all(|e| e.2.im == 0.0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for i in 0..self.dim {
            m[(i, i)] = Complex64::new(self.diag[i], 0.0);
        }
        for &(a, b, v) in &self.upper {
            m[(a as usize, b as usize)] += v;
            m[(b as usize, a as usize)] += v.conj();
        }
        m
    }

    /// Unitary conjugation by diag(e^{iθ}): entries become e^{iθ_a} H_ab e^{−iθ_b}.
    pub fn conjugated(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: theta.len(),
            });
        }
        let upper = self
            .upper
            .iter()
            .map(|&(a, b, v)| {
                (
                    a,
                    b,
                    v * Complex64::from_polar(1.0, theta[a as usize] - theta[b as usize]),
                )
            })
            .collect();
        Ok(Self::from_parts(
            self.dim,
            self.diag.clone(),
            upper,
            self.meta.clone(),
        ))
    }

    /// Same matrix plus diag(extra).
    pub fn add_diagonal(&self, extra: &[f64]) -> Result<Self> {
        if extra.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: extra.len(),
            });
        }
        let diag = self.diag.iter().zip(extra).map(|(a, b)| a + b).collect();
        Ok(Self::from_parts(
            self.dim,
            diag,
            self.upper.clone(),
            self.meta.clone(),
        ))
    }

    /// `row col re im` per line, zero-based, upper triangle including the diagonal.
    pub fn export_triplets(&self) -> String {
        let mut s = String::new();
        let mut entries: Vec<(u32, u32, Complex64)> = (0..self.dim)
            .map(|i| (i as u32, i as u32, Complex64::new(self.diag[i], 0.0)))
            .collect();
        entries.extend(self.upper.iter().copied());
        entries.sort_by_key(|e| (e.0, e.1));
        for (a, b, v) in entries {
            let _ = writeln!(s, "{} {} {:.16e} {:.16e}", a, b, v.re, v.im);
        }
        s
    }

    pub fn export_meta(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            dim: usize,
            nnz_upper: usize,
            indexing: &'static str,
            #[serde(flatten)]
            meta: &'a OperatorMeta,
        }
        serde_json::to_string_pretty(&Sidecar {
            dim: self.dim,
            nnz_upper: self.upper.len() + self.dim,
            indexing: "zero-based, row-major interior nodes",
            meta: &self.meta,
        })
        .expect("metadata serializes")
    }
}

fn describe(field: &PotentialField) -> String {
    if field.is_zero() {
        "none".into()
    } else {
        format!(
            "{} charges, {} analytic terms",
            field.charges.len(),
            field.terms.len()
        )
    }
}

/// n·Δφ sampled at the grid nodes.
pub fn potential_values(grid: &Grid, field: &PotentialField, n: i64) -> Vec<f64> {
    if field.is_zero() || n == 0 {
        return vec![0.0; grid.len()];
    }
    grid.pos
        .iter()
        .map(|&z| n as f64 * field.laplacian(z))
        .collect()
}

fn assemble(
    grid: &Grid,
    phases: Option<&LinkPhaseField>,
    field: &PotentialField,
    n: i64,
) -> HermitianOperator {
    let h2 = grid.h() * grid.h();
    let v = potential_values(grid, field, n);
    let diag: Vec<f64> = v.iter().map(|x| 4.0 / h2 + x).collect();
    let upper = grid
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let u = match phases {
                Some(p) if n != 0 => p.phase(k, n),
                _ => Complex64::new(1.0, 0.0),
            };
            (e.a, e.b, -u / h2)
        })
        .collect();
    let meta = OperatorMeta {
        h: grid.h(),
        potential: describe(field),
        magnetic: phases.is_some(),
        coupling: n,
        dirichlet: "omission".into(),
    };
    HermitianOperator::from_parts(grid.len(), diag, upper, meta)
}

/// Five-point discretization of −(∇ − inA)² + nΔφ with Peierls link phases.
pub fn assemble_magnetic(
    grid: &Grid,
    phases: &LinkPhaseField,
    field: &PotentialField,
    n: i64,
) -> Result<HermitianOperator> {
    if phases.len() != grid.edges.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.edges.len(),
            found: phases.len(),
        });
    }
    Ok(assemble(grid, Some(phases), field, n))
}

/// Five-point discretization of −Δ + nΔφ.
pub fn assemble_electric(grid: &Grid, field: &PotentialField, n: i64) -> Result<HermitianOperator> {
    Ok(assemble(grid, None, field, n))
}

pub fn dirichlet_laplacian(grid: &Grid) -> HermitianOperator {
    assemble(grid, None, &PotentialField::zero(), 0)
}
