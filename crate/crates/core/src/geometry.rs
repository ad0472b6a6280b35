//! Lattice disk families: generations of centers on B^{-k}(Z + iZ), their
//! counting statistics, and the covering-disk partition used by the flux
//! schedule.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThickSetParams {
    pub b: u32,
    pub k_max: usize,
    /// Disk radii ρ_1..ρ_K.
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub nu: Vec<f64>,
    #[serde(default = "one")]
    pub domain_radius: f64,
}

fn one() -> f64 {
    1.0
}

impl ThickSetParams {
    /// ρ_k = ε_k³, σ_k = 1 and the default ν_k.
    pub fn with_defaults(b: u32, k_max: usize) -> Self {
        let mut p = Self {
            b,
            k_max,
            rho: Vec::new(),
            sigma: vec![1.0; k_max],
            nu: (1..=k_max).map(|k| default_nu(b, k)).collect(),
            domain_radius: 1.0,
        };
        p.rho = (1..=k_max).map(|k| p.eps(k).powi(3)).collect();
        p
    }

    /// ε_k = B^{-k}.
    pub fn eps(&self, k: usize) -> f64 {
        (self.b as f64).powi(-(k as i32))
    }

    pub fn rho(&self, k: usize) -> f64 {
        self.rho[k - 1]
    }

    pub fn nu(&self, k: usize) -> f64 {
        self.nu[k - 1]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.b < 3 {
            return bad(format!("B = {} must be at least 3", self.b));
        }
        if !(self.domain_radius > 0.0 && self.domain_radius.is_finite()) {
            return bad("domain_radius must be positive".into());
        }
        for (name, len) in [
            ("rho", self.rho.len()),
            ("sigma", self.sigma.len()),
            ("nu", self.nu.len()),
        ] {
            if len < self.k_max {
                return bad(format!("{name} has {len} entries, need {}", self.k_max));
            }
        }
        if (self.b as f64).powi(self.k_max as i32) > 1e5 {
            return bad("B^K_max exceeds 1e5 lattice points per unit length".into());
        }
        for k in 1..=self.k_max {
            let e = self.eps(k);
            let r = self.rho(k);
            if !(r > 0.0 && r <= e * e / 8.0) {
                return bad(format!(
                    "rho_{k} = {r} must lie in (0, eps_{k}^2/8 = {}]",
                    e * e / 8.0
                ));
            }
            if !(self.sigma[k - 1] >= 1.0) {
                return bad(format!("sigma_{k} must be >= 1"));
            }
            if !(self.nu(k) > 0.0) {
                return bad(format!("nu_{k} must be positive"));
            }
        }
        Ok(())
    }
}

/// max(B^{2k} 2^{-B^{k-1}}, k^{-2.2}): large enough for every scheduled flux
/// to satisfy μ ≤ ν_k ε_k², and summable against k(1 + σ_k).
pub fn default_nu(b: u32, k: usize) -> f64 {
    let bf = b as f64;
    let log2 = 2.0 * k as f64 * bf.log2() - bf.powi(k as i32 - 1);
    let sched = if log2 < -1000.0 { 0.0 } else { log2.exp2() };
    sched.max((k as f64).powf(-2.2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        assert!(radius > 0.0, "disk radius must be positive");
        Self { center, radius }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub k: usize,
    pub cell: f64,
    pub radius: f64,
    pub centers: Vec<Complex64>,
    /// Integer lattice coordinates: center = (a + ib)·cell.
    pub lattice: Vec<(i64, i64)>,
}

impl Generation {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn disk(&self, j: usize) -> Disk {
        Disk::new(self.centers[j], self.radius)
    }

    fn index(&self) -> CellMap {
        self.lattice
            .iter()
            .enumerate()
            .map(|(j, &p)| (p, j))
            .collect()
    }

    /// Indices of centers within `r` of `z`, for r below one lattice cell.
    pub fn centers_near(&self, index: &CellMap, z: Complex64, r: f64) -> Vec<usize> {
        let a = (z.re / self.cell).round() as i64;
        let b = (z.im / self.cell).round() as i64;
        let reach = (r / self.cell).ceil() as i64 + 1;
        let mut out = Vec::new();
        for da in -reach..=reach {
            for db in -reach..=reach {
                if let Some(&j) = index.get(&(a + da, b + db)) {
                    if (self.centers[j] - z).norm() < r {
                        out.push(j);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

type CellMap = HashMap<(i64, i64), usize>;

/// Lookup structure answering "is z inside a removed disk" across generations.
#[derive(Debug, Clone)]
pub struct DiskIndex {
    /// Each generation with its lattice-cell lookup.
    gens: Vec<(Generation, CellMap)>,
}

impl DiskIndex {
    pub fn new(gens: &[Generation]) -> Self {
        Self {
            gens: gens.iter().map(|g| (g.clone(), g.index())).collect(),
        }
    }

    /// Nearest center of generation `k` to z, with its distance.
    pub fn nearest(&self, k: usize, z: Complex64) -> Option<(usize, f64)> {
        let (g, idx) = &self.gens[k - 1];
        let a = (z.re / g.cell).round() as i64;
        let b = (z.im / g.cell).round() as i64;
        let mut best: Option<(usize, f64)> = None;
        for da in -1..=1 {
            for db in -1..=1 {
                if let Some(&j) = idx.get(&(a + da, b + db)) {
                    let d = (g.centers[j] - z).norm();
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((j, d));
                    }
                }
            }
        }
        best
    }

    /// z ∈ Ω_k: inside the domain and outside the closed disks of generations 1..=k.
    pub fn in_omega(&self, k: usize, domain_radius: f64, z: Complex64) -> bool {
        if z.norm() >= domain_radius {
            return false;
        }
        (1..=k.min(self.gens.len())).all(|l| {
            let r = self.gens[l - 1].0.radius;
            self.nearest(l, z).is_none_or(|(_, d)| d > r)
        })
    }

    pub fn generations(&self) -> impl Iterator<Item = &Generation> {
        self.gens.iter().map(|(g, _)| g)
    }
}

pub fn build_generations(params: &ThickSetParams) -> Result<Vec<Generation>> {
    params.validate()?;
    let mut gens: Vec<Generation> = Vec::with_capacity(params.k_max);
    let mut indices: Vec<CellMap> = Vec::new();
    let big_r = params.domain_radius;
    for k in 1..=params.k_max {
        let eps = params.eps(k);
        let scale = (params.b as i64).pow(k as u32);
        let s = big_r * scale as f64;
        // closure of B(z, ε_k) inside the domain: |z| + ε_k ≤ R, exact when R·B^k is an integer
        let s_int = s.round();
        let exact = (s - s_int).abs() < 1e-9;
        let reach = s.floor() as i64;
        let mut centers = Vec::new();
        let mut lattice = Vec::new();
        for a in -reach..=reach {
            for b in -reach..=reach {
                let inside = if exact {
                    let lim = s_int as i64 - 1;
                    lim >= 0 && a * a + b * b <= lim * lim
                } else {
                    ((a * a + b * b) as f64).sqrt() / scale as f64 + eps <= big_r
                };
                if !inside {
                    continue;
                }
                let z = Complex64::new(a as f64 / scale as f64, b as f64 / scale as f64);
                let clear = gens.iter().zip(&indices).all(|(g, idx)| {
                    // dist(z, D^l_i) > ε_k  ⇔  |z − z^l_i| > ε_k + ρ_l
                    g.centers_near(idx, z, eps + g.radius + 1e-15)
                        .iter()
                        .all(|&j| {
                            let (c, d) = g.lattice[j];
                            let m = scale / (g.cell.recip().round() as i64);
                            let da = (a - c * m) as f64;
                            let db = (b - d * m) as f64;
                            da.hypot(db) > 1.0 + g.radius * scale as f64
                        })
                });
                if clear {
                    centers.push(z);
                    lattice.push((a, b));
                }
            }
        }
        let g = Generation {
            k,
            cell: eps,
            radius: params.rho(k),
            centers,
            lattice,
        };
        indices.push(g.index());
        gens.push(g);
    }
    Ok(gens)
}

/// Checks the lattice, closure and separation invariants of generation `g`
/// against the earlier generations in `prev`.
pub fn check_generation(g: &Generation, prev: &[Generation], domain_radius: f64) -> Result<()> {
    let eps = g.cell;
    for (j, z) in g.centers.iter().enumerate() {
        let fa = z.re / eps;
        let fb = z.im / eps;
        if (fa - fa.round()).abs() > 1e-12 || (fb - fb.round()).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "center {j} of generation {} is off-lattice",
                g.k
            )));
        }
        if z.norm() + eps > domain_radius * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "center {j} of generation {} too close to the boundary",
                g.k
            )));
        }
        for p in prev {
            for c in &p.centers {
                if (z - c).norm() - p.radius <= eps * (1.0 - 1e-12) {
                    return Err(Error::InvalidParams(format!(
                        "center {j} of generation {} within eps of a generation-{} disk",
                        g.k, p.k
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingRow {
    pub k: usize,
    pub m: usize,
    /// ε_k^{-2}/4
    pub count_bound: f64,
    pub count_pass: bool,
    /// Minimum over interior samples of #{j : |z_j − z| < 4√ε_k}; `None` if no sample qualified.
    pub min_local: Option<usize>,
    /// ε_k^{-1}
    pub local_bound: f64,
    pub local_pass: bool,
    pub samples: usize,
    /// B below the threshold where the bounds are expected to hold.
    pub asymptotic: bool,
}

pub const COUNTING_THRESHOLD_B: u32 = 16;

/// Per-generation counting statistics. Samples lie on a grid of pitch ε_k/2
/// over Ω_k, keeping only points at distance ≥ √ε_k from the outer boundary.
pub fn counting_report(gens: &[Generation], domain_radius: f64) -> Vec<CountingRow> {
    let index = DiskIndex::new(gens);
    gens.iter()
        .map(|g| {
            let eps = g.cell;
            let b = eps.powf(-1.0 / g.k as f64).round() as u32;
            let r_loc = 4.0 * eps.sqrt();
            // lattice occupancy with row prefix sums
            let reach = g
                .lattice
                .iter()
                .map(|&(a, b)| a.abs().max(b.abs()))
                .max()
                .unwrap_or(0);
            let w = (2 * reach + 1) as usize;
            let mut prefix = vec![0u32; w * (w + 1)];
            for &(a, bb) in &g.lattice {
                let row = (bb + reach) as usize;
                let col = (a + reach) as usize;
                prefix[row * (w + 1) + col + 1] += 1;
            }
            for row in 0..w {
                for col in 0..w {
                    prefix[row * (w + 1) + col + 1] += prefix[row * (w + 1) + col];
                }
            }
            let count_near = |z: Complex64| -> usize {
                let mut n = 0usize;
                let b_lo = ((z.im - r_loc) / eps).ceil() as i64;
                let b_hi = ((z.im + r_loc) / eps).floor() as i64;
                for bb in b_lo.max(-reach)..=b_hi.min(reach) {
                    let dy = bb as f64 * eps - z.im;
                    let half = r_loc * r_loc - dy * dy;
                    if half <= 0.0 {
                        continue;
                    }
                    let half = half.sqrt();
                    let mut a_lo = ((z.re - half) / eps).ceil() as i64;
                    let mut a_hi = ((z.re + half) / eps).floor() as i64;
                    // strict inequality |z_j − z| < r
                    if ((a_lo as f64 * eps - z.re).hypot(dy)) >= r_loc {
                        a_lo += 1;
                    }
                    if ((a_hi as f64 * eps - z.re).hypot(dy)) >= r_loc {
                        a_hi -= 1;
                    }
                    let a_lo = a_lo.max(-reach);
                    let a_hi = a_hi.min(reach);
                    if a_hi < a_lo {
                        continue;
                    }
                    let row = (bb + reach) as usize * (w + 1);
                    n += (prefix[row + (a_hi + reach) as usize + 1]
                        - prefix[row + (a_lo + reach) as usize]) as usize;
                }
                n
            };
            let pitch = eps / 2.0;
            let inner = domain_radius - eps.sqrt();
            let steps = (inner / pitch).floor() as i64;
            let mut min_local: Option<usize> = None;
            let mut samples = 0;
            for i in -steps..=steps {
                for j in -steps..=steps {
                    let z = Complex64::new(i as f64 * pitch, j as f64 * pitch);
                    if z.norm() > inner || !index.in_omega(g.k, domain_radius, z) {
                        continue;
                    }
                    samples += 1;
                    let c = count_near(z);
                    min_local = Some(min_local.map_or(c, |m| m.min(c)));
                }
            }
            let count_bound = eps.powi(-2) / 4.0;
            let local_bound = 1.0 / eps;
            CountingRow {
                k: g.k,
                m: g.len(),
                count_bound,
                count_pass: g.len() as f64 >= count_bound,
                min_local,
                local_bound,
                local_pass: min_local.is_some_and(|m| m as f64 >= local_bound),
                samples,
                asymptotic: b < COUNTING_THRESHOLD_B,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubfamilyPartition {
    pub covering: Vec<Disk>,
    /// Subfamily index of each disk of the generation.
    pub assignment: Vec<usize>,
    pub counts: Vec<usize>,
    /// Covering centers are pairwise ≥ 1.5 × radius apart, so each half-shrunk
    /// covering disk misses all the others.
    pub half_disjoint: bool,
    /// max over sampled z ∈ Ω_{k−1} of distance(z, covering centers)/√ε_k.
    pub covering_constant: f64,
}

impl SubfamilyPartition {
    pub fn members(&self, s: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == s)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn min_count(&self) -> usize {
        self.counts.iter().copied().min().unwrap_or(0)
    }
}

/// Greedy covering by disks of radius 8√ε_k centered at generation-k centers,
/// scanning centers in lattice order; each disk joins its nearest covering center.
pub fn build_subfamilies(
    gen: &Generation,
    prev: &[Generation],
    domain_radius: f64,
) -> Result<SubfamilyPartition> {
    let eps = gen.cell;
    let r_cov = 8.0 * eps.sqrt();
    let mut chosen: Vec<Complex64> = Vec::new();
    for &z in &gen.centers {
        if chosen.iter().all(|c| (z - c).norm() > r_cov - gen.radius) {
            chosen.push(z);
        }
    }
    let covering: Vec<Disk> = chosen.iter().map(|&c| Disk::new(c, r_cov)).collect();
    let mut assignment = Vec::with_capacity(gen.len());
    let mut counts = vec![0usize; covering.len()];
    for (j, &z) in gen.centers.iter().enumerate() {
        let (s, d) = chosen
            .iter()
            .enumerate()
            .map(|(s, c)| (s, (z - c).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, x| {
                if x.1 < acc.1 {
                    x
                } else {
                    acc
                }
            });
        if s == usize::MAX || d + gen.radius > r_cov * (1.0 + 1e-12) {
            return Err(Error::PartitionInfeasible(j));
        }
        assignment.push(s);
        counts[s] += 1;
    }
    let half_disjoint = chosen.iter().enumerate().all(|(i, a)| {
        chosen[i + 1..]
            .iter()
            .all(|b| (a - b).norm() >= 1.5 * r_cov)
    });

    let index = DiskIndex::new(prev);
    let pitch = eps;
    let steps = (domain_radius / pitch).floor() as i64;
    let mut worst: f64 = 0.0;
    for i in -steps..=steps {
        for j in -steps..=steps {
            let z = Complex64::new(i as f64 * pitch, j as f64 * pitch);
            if !index.in_omega(prev.len(), domain_radius, z) {
                continue;
            }
            let d = chosen
                .iter()
                .map(|c| (z - c).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    Ok(SubfamilyPartition {
        covering,
        assignment,
        counts,
        half_disjoint,
        covering_constant: worst / eps.sqrt(),
    })
}

/// Line-oriented text: per generation a header `k eps rho m`, then m lines `re im`.
pub fn generations_to_text(gens: &[Generation]) -> String {
    let mut s = String::new();
    for g in gens {
        let _ = writeln!(s, "{} {:.16e} {:.16e} {}", g.k, g.cell, g.radius, g.len());
        for z in &g.centers {
            let _ = writeln!(s, "{:.16e} {:.16e}", z.re, z.im);
        }
    }
    s
}

pub fn generations_from_text(text: &str) -> Result<Vec<Generation>> {
    let perr = |m: &str| Error::Parse(m.to_string());
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut gens = Vec::new();
    while let Some(header) = lines.next() {
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 4 {
            return Err(perr("generation header needs 4 fields"));
        }
        let k: usize = f[0].parse().map_err(|_| perr("bad k"))?;
        let cell: f64 = f[1].parse().map_err(|_| perr("bad eps"))?;
        let radius: f64 = f[2].parse().map_err(|_| perr("bad rho"))?;
        let m: usize = f[3].parse().map_err(|_| perr("bad m"))?;
        let mut centers = Vec::with_capacity(m);
        let mut lattice = Vec::with_capacity(m);
        for _ in 0..m {
            let l = lines.next().ok_or_else(|| perr("truncated center list"))?;
            let mut it = l.split_whitespace();
            let re: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr("bad re"))?;
            let im: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| perr("bad im"))?;
            centers.push(Complex64::new(re, im));
            lattice.push(((re / cell).round() as i64, (im / cell).round() as i64));
        }
        gens.push(Generation {
            k,
            cell,
            radius,
            centers,
            lattice,
        });
    }
    Ok(gens)
}

/// Set of lattice points of every generation, for quick membership checks in tests and reports.
pub fn lattice_set(g: &Generation) -> HashSet<(i64, i64)> {
    g.lattice.iter().copied().collect()
}
