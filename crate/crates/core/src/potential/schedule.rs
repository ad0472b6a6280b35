//! Flux weights μ^k_j: dyadic blocks of multipliers n, each served by one
//! fresh disk per subfamily carrying n_lo·μ = 1/4.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::{Generation, SubfamilyPartition, ThickSetParams};

use super::field::{flux_f64, Flux, PotentialField, RadialCharge};

/// N_k = 2^{B^{k−1}}, or None when it does not fit in 128 bits.
pub fn n_k(b: u32, k: usize) -> Option<u128> {
    if k == 0 {
        return None;
    }
    let e = (b as u128).checked_pow(k as u32 - 1)?;
    if e >= 127 {
        return None;
    }
    Some(1u128 << e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub k: usize,
    pub n_lo: u128,
    /// Exclusive; at most 2·n_lo.
    pub n_hi: u128,
    /// Indices into generation k, one per subfamily.
    pub disks: Vec<usize>,
    pub mu: Flux,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuSchedule {
    pub blocks: Vec<Block>,
    /// Weight of never-chosen disks, per generation.
    pub leftover: Vec<Flux>,
    /// N_1..N_{K+1}.
    pub n_seq: Vec<Option<u128>>,
    /// μ^k_j for every disk, indexed [k−1][j].
    pub mu: Vec<Vec<Flux>>,
}

impl MuSchedule {
    pub fn block_of(&self, n: u128) -> Option<&Block> {
        self.blocks.iter().find(|b| b.n_lo <= n && n < b.n_hi)
    }

    pub fn mu_f64(&self, k: usize, j: usize) -> f64 {
        flux_f64(&self.mu[k - 1][j])
    }
}

fn leftover_for(next: Option<u128>, n_max: u128, k: usize) -> Result<Flux> {
    let den = match next {
        Some(n) if n <= i128::MAX as u128 => n,
        _ => 4 * n_max,
    };
    let den: i128 = den.try_into().map_err(|_| {
        Error::InvalidParams(format!(
            "leftover weight for generation {k} not representable"
        ))
    })?;
    Ok(Flux::new(1, den))
}

pub fn schedule_mu(
    gens: &[Generation],
    partitions: &[SubfamilyPartition],
    params: &ThickSetParams,
    n_max: u128,
    leftover_override: Option<Flux>,
) -> Result<MuSchedule> {
    if gens.len() != partitions.len() {
        return Err(Error::DimensionMismatch {
            expected: gens.len(),
            found: partitions.len(),
        });
    }
    let n1 = n_k(params.b, 1).expect("N_1 = 2");
    if n_max < n1 {
        return Err(Error::InvalidParams(format!(
            "n_max = {n_max} is below N_1 = {n1}"
        )));
    }
    if n_max > (1u128 << 120) {
        return Err(Error::InvalidParams("n_max too large".into()));
    }
    let kk = gens.len();
    let n_seq: Vec<Option<u128>> = (1..=kk + 1).map(|k| n_k(params.b, k)).collect();
    let mut blocks = Vec::new();
    let mut leftover = Vec::with_capacity(kk);
    let mut mu = Vec::with_capacity(kk);
    for (gi, (g, part)) in gens.iter().zip(partitions).enumerate() {
        let k = gi + 1;
        if part.assignment.len() != g.len() {
            return Err(Error::DimensionMismatch {
                expected: g.len(),
                found: part.assignment.len(),
            });
        }
        let left = match &leftover_override {
            Some(f) => *f,
            None => leftover_for(n_seq[gi + 1], n_max, k)?,
        };
        let mut weights = vec![left; g.len()];
        let mut taken = vec![false; g.len()];
        let members: Vec<Vec<usize>> = (0..part.counts.len()).map(|s| part.members(s)).collect();
        let centroids: Vec<Complex64> = members
            .iter()
            .map(|m| {
                let s: Complex64 = m.iter().map(|&j| g.centers[j]).sum();
                s / m.len().max(1) as f64
            })
            .collect();
        let cap = params.nu(k) * params.eps(k).powi(2);
        if let Some(nk) = n_seq[gi] {
            let end = n_seq[gi + 1].map_or(n_max, |n| n.min(n_max));
            let mut n_lo = nk;
            while n_lo < end {
                let n_hi = (2 * n_lo).min(end);
                let w = Flux::new(1, 4 * n_lo as i128);
                if flux_f64(&w) > cap {
                    return Err(Error::InvalidParams(format!(
                        "weight 1/{} exceeds nu_{k} eps_{k}^2 = {cap:e}",
                        4 * n_lo
                    )));
                }
                let mut disks = Vec::with_capacity(members.len());
                for (s, m) in members.iter().enumerate() {
                    // unchosen member closest to the subfamily centroid
                    let pick = m
                        .iter()
                        .copied()
                        .filter(|&j| !taken[j])
                        .min_by(|&a, &b| {
                            let da = (g.centers[a] - centroids[s]).norm();
                            let db = (g.centers[b] - centroids[s]).norm();
                            da.total_cmp(&db).then(a.cmp(&b))
                        })
                        .ok_or(Error::InsufficientDisks { k, n: n_lo })?;
                    taken[pick] = true;
                    weights[pick] = w;
                    disks.push(pick);
                }
                blocks.push(Block {
                    k,
                    n_lo,
                    n_hi,
                    disks,
                    mu: w,
                });
                n_lo *= 2;
            }
        }
        leftover.push(left);
        mu.push(weights);
    }
    Ok(MuSchedule {
        blocks,
        leftover,
        n_seq,
        mu,
    })
}

/// Σ over generations l ≤ truncate_k of the charges (z^l_j, ρ_l, μ^l_j).
pub fn assemble_phi(
    gens: &[Generation],
    schedule: &MuSchedule,
    truncate_k: usize,
) -> Result<PotentialField> {
    if truncate_k > gens.len() {
        return Err(Error::InvalidParams(format!(
            "truncate_k = {truncate_k} exceeds {} generations",
            gens.len()
        )));
    }
    let mut charges = Vec::new();
    for g in &gens[..truncate_k] {
        for (j, &z) in g.centers.iter().enumerate() {
            let m = schedule.mu[g.k - 1][j];
            if m.is_zero() {
                continue;
            }
            charges.push(RadialCharge::new(z, g.radius, m)?);
        }
    }
    Ok(PotentialField::new(charges, Vec::new()))
}

/// distance(n·mu, Z) computed exactly.
pub fn dist_to_integers_exact(n: u128, mu: &Flux) -> Flux {
    let x = *mu * Flux::from_integer(n as i128);
    let fl = x.floor();
    let frac = x - fl;
    let other = Flux::from_integer(1) - frac;
    if frac < other {
        frac
    } else {
        other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_sequence() {
        assert_eq!(n_k(3, 1), Some(2));
        assert_eq!(n_k(8, 2), Some(256));
        assert_eq!(n_k(8, 3), Some(1u128 << 64));
        assert_eq!(n_k(8, 4), None);
    }

    #[test]
    fn exact_distance() {
        assert_eq!(dist_to_integers_exact(3, &Flux::new(1, 4)), Flux::new(1, 4));
        assert_eq!(dist_to_integers_exact(6, &Flux::new(1, 4)), Flux::new(1, 2));
        assert_eq!(dist_to_integers_exact(4, &Flux::new(1, 4)), Flux::zero());
    }
}
