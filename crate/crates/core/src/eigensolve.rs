//! Lowest eigenpair of a sparse Hermitian operator by block shifted inverse
//! iteration with preconditioned conjugate-gradient inner solves.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretize::HermitianOperator;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Residual bound relative to max(1, |λ|).
    pub tol: f64,
    /// Outer iterations.
    pub max_iter: usize,
    pub seed: u64,
    /// Block width; extra vectors speed up separation from the next levels.
    pub block: usize,
    /// Operators at most this large go straight to the dense solver.
    pub dense_cutoff: usize,
    pub max_inner: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            seed: 0,
            block: 3,
            dense_cutoff: 48,
            max_inner: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl EigenResult {
    /// `lambda residual iterations converged`, one header line and one value line.
    pub fn to_record(&self) -> String {
        format!(
            "lambda residual iterations converged\n{:.16e} {:.16e} {} {}\n",
            self.lambda, self.residual, self.iterations, self.converged
        )
    }
}

pub fn lowest_eigenpair(
    op: &HermitianOperator,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenResult> {
    lowest_eigenpair_with(
        op,
        &EigenOptions {
            tol,
            max_iter,
            seed,
            ..EigenOptions::default()
        },
    )
}

pub fn lowest_eigenpair_with(op: &HermitianOperator, opts: &EigenOptions) -> Result<EigenResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance {} must be positive",
            opts.tol
        )));
    }
    if op.dim == 0 {
        return Err(Error::EmptyGrid);
    }
    if op.dim <= opts.dense_cutoff.max(opts.block) {
        return dense_lowest(op);
    }
    Solver::new(op, opts).run()
}

fn dense_lowest(op: &HermitianOperator) -> Result<EigenResult> {
    let eig = SymmetricEigen::new(op.to_dense());
    let (i, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let mut v: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
    normalize(&mut v);
    fix_phase(&mut v);
    let residual = residual_norm(op, &v, lambda);
    Ok(EigenResult {
        lambda,
        vector: v,
        residual,
        iterations: 0,
        converged: true,
    })
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Rotates the vector so its largest entry is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    let Some(big) = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
    else {
        return;
    };
    if big.norm() > 0.0 {
        let rot = big.conj() / big.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

fn residual_norm(op: &HermitianOperator, v: &[Complex64], lambda: f64) -> f64 {
    let mut y = vec![ZERO; op.dim];
    op.apply(v, &mut y);
    y.iter()
        .zip(v)
        .map(|(a, b)| (a - b * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

enum CgFail {
    Indefinite,
    NotFinite,
    Stagnated,
}

struct Solver<'a> {
    op: &'a HermitianOperator,
    opts: &'a EigenOptions,
    rng: ChaCha8Rng,
    real: bool,
    sigma0: f64,
}

impl<'a> Solver<'a> {
    fn new(op: &'a HermitianOperator, opts: &'a EigenOptions) -> Self {
        Self {
            op,
            opts,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            real: op.is_real(),
            sigma0: op.gershgorin_floor() - 1.0,
        }
    }

    fn random_vector(&mut self) -> Vec<Complex64> {
        let real = self.real;
        (0..self.op.dim)
            .map(|_| {
                let re = self.rng.random_range(-1.0..1.0);
                let im = if real {
                    0.0
                } else {
                    self.rng.random_range(-1.0..1.0)
                };
                Complex64::new(re, im)
            })
            .collect()
    }

    /// Modified Gram–Schmidt, applied twice; collapsed columns are redrawn.
    fn orthonormalize(&mut self, x: &mut [Vec<Complex64>]) {
        for i in 0..x.len() {
            for _attempt in 0..4 {
                for _pass in 0..2 {
                    for j in 0..i {
                        let c = dot(&x[j], &x[i]);
                        let (head, tail) = x.split_at_mut(i);
                        tail[0]
                            .iter_mut()
                            .zip(&head[j])
                            .for_each(|(a, b)| *a -= c * b);
                    }
                }
                if normalize(&mut x[i]) > 1e-10 {
                    break;
                }
                x[i] = self.random_vector();
            }
        }
    }

    /// Solves (H − σ)y = b by Jacobi-preconditioned CG starting from y.
    fn cg(
        &self,
        sigma: f64,
        b: &[Complex64],
        y: &mut [Complex64],
        rel_tol: f64,
    ) -> std::result::Result<usize, CgFail> {
        let n = self.op.dim;
        let pinv: Vec<f64> = self
            .op
            .diag
            .iter()
            .map(|d| 1.0 / (d - sigma).max(f64::MIN_POSITIVE))
            .collect();
        let apply = |x: &[Complex64], out: &mut [Complex64]| {
            self.op.apply(x, out);
            out.iter_mut().zip(x).for_each(|(o, xi)| *o -= xi * sigma);
        };
        let mut r = vec![ZERO; n];
        apply(y, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let target = rel_tol * norm(b);
        let r0 = norm(&r);
        if r0 <= target {
            return Ok(0);
        }
        let mut z: Vec<Complex64> = r.iter().zip(&pinv).map(|(a, p)| a * p).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re;
        let mut ap = vec![ZERO; n];
        for it in 1..=self.opts.max_inner {
            apply(&p, &mut ap);
            let pap = dot(&p, &ap).re;
            if !pap.is_finite() {
                return Err(CgFail::NotFinite);
            }
            if pap <= 0.0 {
                return Err(CgFail::Indefinite);
            }
            let alpha = rz / pap;
            y.iter_mut().zip(&p).for_each(|(a, b)| *a += b * alpha);
            r.iter_mut().zip(&ap).for_each(|(a, b)| *a -= b * alpha);
            let rn = norm(&r);
            if !rn.is_finite() {
                return Err(CgFail::NotFinite);
            }
            if rn <= target {
                return Ok(it);
            }
            z.iter_mut()
                .zip(r.iter().zip(&pinv))
                .for_each(|(zi, (ri, pi))| *zi = ri * pi);
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            rz = rz_new;
            p.iter_mut()
                .zip(&z)
                .for_each(|(pi, zi)| *pi = zi + *pi * beta);
        }
        let rn = norm(&r);
        if rn < r0 {
            Ok(self.opts.max_inner)
        } else {
            Err(CgFail::Stagnated)
        }
    }

    /// Rayleigh–Ritz on span(x); returns ascending Ritz values and rotates x and hx.
    fn rayleigh_ritz(&self, x: &mut Vec<Vec<Complex64>>, hx: &mut Vec<Vec<Complex64>>) -> Vec<f64> {
        let p = x.len();
        for (xi, hi) in x.iter().zip(hx.iter_mut()) {
            self.op.apply(xi, hi);
        }
        let mut g = DMatrix::from_element(p, p, ZERO);
        for i in 0..p {
            for j in 0..p {
                g[(i, j)] = dot(&x[i], &hx[j]);
            }
        }
        let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let rotate = |v: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            order
                .iter()
                .map(|&c| {
                    let mut out = vec![ZERO; self.op.dim];
                    for (j, vj) in v.iter().enumerate() {
                        let w = eig.eigenvectors[(j, c)];
                        out.iter_mut().zip(vj).for_each(|(o, a)| *o += a * w);
                    }
                    out
                })
                .collect()
        };
        *x = rotate(x);
        *hx = rotate(hx);
        order.iter().map(|&c| eig.eigenvalues[c]).collect()
    }

    fn run(mut self) -> Result<EigenResult> {
        let n = self.op.dim;
        let p = self.opts.block.clamp(1, n);
        let mut x: Vec<Vec<Complex64>> = (0..p).map(|_| self.random_vector()).collect();
        let mut hx = vec![vec![ZERO; n]; p];
        let mut sigma = self.sigma0;
        let mut reverted = false;
        let mut best: Option<(f64, Vec<Complex64>, f64)> = None;
        let mut iterations = 0;

        for outer in 0..=self.opts.max_iter {
            iterations = outer;
            self.orthonormalize(&mut x);
            let theta = self.rayleigh_ritz(&mut x, &mut hx);
            let res = hx[0]
                .iter()
                .zip(&x[0])
                .map(|(a, b)| (a - b * theta[0]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if !res.is_finite() || !theta[0].is_finite() {
                return Err(Error::Breakdown { iterations: outer });
            }
            if best.as_ref().is_none_or(|b| res < b.2) {
                best = Some((theta[0], x[0].clone(), res));
            }
            let scale = theta[0].abs().max(1.0);
            if res <= self.opts.tol * scale || outer == self.opts.max_iter {
                break;
            }
            // shift toward θ₀ once the residual is small; an indefinite inner solve reverts it
            let ritz_gap = if p > 1 { theta[1] - theta[0] } else { 0.0 };
            if !reverted && res < 1e-2 * scale {
                let target = theta[0] - (2.0 * res).max(0.5 * ritz_gap);
                if target > sigma {
                    sigma = target;
                }
            }

            let mut next = Vec::with_capacity(p);
            for i in 0..p {
                let gap = (theta[i] - sigma).max(1e-300);
                let ri = hx[i]
                    .iter()
                    .zip(&x[i])
                    .map(|(a, b)| (a - b * theta[i]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let eta = (0.1 * ri / gap).clamp(1e-13, 1e-2);
                let mut y: Vec<Complex64> = x[i].iter().map(|v| v / gap).collect();
                match self.cg(sigma, &x[i], &mut y, eta) {
                    Ok(_) => next.push(y),
                    Err(CgFail::Indefinite) if sigma != self.sigma0 => {
                        sigma = self.sigma0;
                        reverted = true;
                        let gap = theta[i] - sigma;
                        let mut y: Vec<Complex64> = x[i].iter().map(|v| v / gap).collect();
                        match self.cg(sigma, &x[i], &mut y, eta) {
                            Ok(_) => next.push(y),
                            Err(_) => return Err(Error::Breakdown { iterations: outer }),
                        }
                    }
                    Err(CgFail::Stagnated) | Err(CgFail::Indefinite) | Err(CgFail::NotFinite) => {
                        return Err(Error::Breakdown { iterations: outer })
                    }
                }
            }
            x = next;
        }

        let (lambda, mut vector, _) = best.expect("at least one iterate");
        normalize(&mut vector);
        fix_phase(&mut vector);
        let residual = residual_norm(self.op, &vector, lambda);
        let converged = residual <= self.opts.tol * lambda.abs().max(1.0);
        Ok(EigenResult {
            lambda,
            vector,
            residual,
            iterations,
            converged,
        })
    }
}

pub fn rayleigh_quotient(op: &HermitianOperator, v: &[Complex64]) -> Result<f64> {
    if v.len() != op.dim {
        return Err(Error::DimensionMismatch {
            expected: op.dim,
            found: v.len(),
        });
    }
    let nn = v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    if nn == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(op.quadratic_form(v) / nn)
}

pub fn rayleigh_quotient_real(op: &HermitianOperator, v: &[f64]) -> Result<f64> {
    let c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    rayleigh_quotient(op, &c)
}

/// All eigenvalues, ascending, by dense decomposition.
pub fn dense_spectrum(op: &HermitianOperator) -> Result<Vec<f64>> {
    if op.dim > 2000 {
        return Err(Error::TooLarge(op.dim));
    }
    if op.dim == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(op.to_dense())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
