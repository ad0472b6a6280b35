use std::collections::HashMap;
use std::f64::consts::PI;

use maglab::analysis::{
    annulus_lambda, kato_check, label_components, periodic_winding_check, pigeonhole_search,
    winding_flux, winding_line,
};
use maglab::discretize::{
    assemble_electric, assemble_magnetic, build_grid, link_phases, potential_values, Grid,
    GridSpec, Mask,
};
use maglab::eigensolve::{dense_spectrum, lowest_eigenpair_with, rayleigh_quotient, EigenOptions};
use maglab::geometry::{build_generations, build_subfamilies, ThickSetParams};
use maglab::potential::{
    assemble_phi, dist_to_integers_exact, extend_to_psi, flux_from_f64, schedule_mu, trial_f, Chi1,
    Chi2, Chi2Params, Flux, PhaseQuadrature, PotentialField, RadialCharge,
};
use maglab::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_charge(max_r: f64) -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.0..max_r, 0.0..2.0 * PI, 0.08..0.25f64, 0.02..0.98f64)
}

fn field_from(raw: &[(f64, f64, f64, f64)]) -> PotentialField {
    let charges = raw
        .iter()
        .map(|&(r, t, rho, mu)| {
            RadialCharge::new(Complex64::from_polar(r, t), rho, flux_from_f64(mu).unwrap()).unwrap()
        })
        .collect();
    PotentialField::new(charges, Vec::new())
}

fn small_disk(cells: usize) -> Grid {
    build_grid(&GridSpec::unit_disk(cells, false)).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn rayleigh_quotient_bounds_lowest_eigenvalue(raw in prop::collection::vec(arb_charge(0.6), 1..4), n in 0i64..8, seed in any::<u64>()) {
        let grid = small_disk(16);
        let field = field_from(&raw);
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact).unwrap();
        let op = assemble_magnetic(&grid, &phases, &field, n).unwrap();
        let lowest = dense_spectrum(&op).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let v = random_vector(&mut rng, grid.len());
            prop_assert!(rayleigh_quotient(&op, &v).unwrap() >= lowest - 1e-9 * lowest.abs().max(1.0));
        }
    }

    #[test]
    fn iterative_solver_matches_dense(raw in prop::collection::vec(arb_charge(0.6), 1..4), n in 0i64..10, seed in any::<u64>()) {
        let grid = small_disk(30);
        prop_assume!(grid.len() <= 2000);
        let field = field_from(&raw);
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact).unwrap();
        let tol = 1e-8;
        let opts = EigenOptions { tol, seed, dense_cutoff: 0, ..EigenOptions::default() };
        for op in [assemble_magnetic(&grid, &phases, &field, n).unwrap(), assemble_electric(&grid, &field, n).unwrap()] {
            let it = lowest_eigenpair_with(&op, &opts).unwrap();
            let dense = dense_spectrum(&op).unwrap()[0];
            prop_assert!(it.converged);
            prop_assert!((it.lambda - dense).abs() <= 10.0 * tol * dense.abs().max(1.0));
        }
    }

    #[test]
    fn nonnegative_potential_never_lowers_ground_state(raw in prop::collection::vec(arb_charge(0.6), 1..3), n in 0i64..6, extra in prop::collection::vec(0.0..50.0f64, 1..8)) {
        let grid = small_disk(18);
        let field = field_from(&raw);
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact).unwrap();
        let op = assemble_magnetic(&grid, &phases, &field, n).unwrap();
        let add: Vec<f64> = (0..grid.len()).map(|i| extra[i % extra.len()]).collect();
        let a = dense_spectrum(&op).unwrap()[0];
        let b = dense_spectrum(&op.add_diagonal(&add).unwrap()).unwrap()[0];
        prop_assert!(b >= a - 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn gauge_conjugation_preserves_spectrum(raw in prop::collection::vec(arb_charge(0.6), 1..3), n in 1i64..6, seed in any::<u64>()) {
        let grid = small_disk(14);
        let field = field_from(&raw);
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact).unwrap();
        let op = assemble_magnetic(&grid, &phases, &field, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let a = dense_spectrum(&op).unwrap();
        let b = dense_spectrum(&op.conjugated(&theta).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn diamagnetic_ordering(raw in prop::collection::vec(arb_charge(0.6), 1..5), n in 1i64..17) {
        let grid = small_disk(18);
        let field = field_from(&raw);
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact).unwrap();
        let e = dense_spectrum(&assemble_electric(&grid, &field, n).unwrap()).unwrap()[0];
        let m = dense_spectrum(&assemble_magnetic(&grid, &phases, &field, n).unwrap()).unwrap()[0];
        prop_assert!(e <= m + 1e-9 * m.abs().max(1.0));
    }

    #[test]
    fn electric_is_entrywise_modulus_of_magnetic(raw in prop::collection::vec(arb_charge(0.6), 1..3), n in 0i64..9) {
        let grid = small_disk(12);
        let field = field_from(&raw);
        let phases = link_phases(&grid, &field, PhaseQuadrature::Exact).unwrap();
        let m = assemble_magnetic(&grid, &phases, &field, n).unwrap().to_dense();
        let e = assemble_electric(&grid, &field, n).unwrap().to_dense();
        for (a, b) in m.iter().zip(e.iter()) {
            prop_assert!((a.norm() - b.re.abs()).abs() <= 1e-9 * b.re.abs().max(1.0));
            prop_assert!(b.im == 0.0);
        }
    }

    #[test]
    fn kato_inequality_holds(raw in prop::collection::vec(arb_charge(0.6), 1..4), n in 0i64..12, seed in any::<u64>()) {
        let grid = small_disk(24);
        let field = field_from(&raw);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_vector(&mut rng, grid.len());
        prop_assert!(kato_check(&grid, &field, n, &u).unwrap().pass);
    }

    #[test]
    fn winding_line_matches_flux(raw in prop::collection::vec((0.0..0.3f64, 0.0..2.0 * PI, 0.05..0.15f64, 0.02..0.98f64), 1..4), radius in 0.5..0.9f64) {
        let field = field_from(&raw);
        // the circle must avoid every support
        for &(r, _, rho, _) in &raw {
            prop_assume!((radius - r).abs() > rho + 1e-3 && r + rho < radius);
        }
        let center = Complex64::new(0.0, 0.0);
        let line = winding_line(&field, center, radius, 256).unwrap();
        let flux = winding_flux(&field, center, radius);
        prop_assert!((line - flux).abs() <= 1e-6, "line {} flux {}", line, flux);
    }

    #[test]
    fn periodic_bound_holds(w in 0.0..1.0f64, rho in 0.1..3.0f64, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let m = 64;
        let h: Vec<f64> = (0..m)
            .map(|i| {
                let s = 2.0 * PI * i as f64 / m as f64;
                (2.0 * PI * w + a * s.cos() + b * (2.0 * s).sin()) / rho
            })
            .collect();
        prop_assert!(periodic_winding_check(&h, rho).unwrap().pass);
    }

    #[test]
    fn pigeonhole_scan_is_minimal(fluxes in prop::collection::vec(0.0..1.0f64, 1..4), step in 1u64..5, eps in 0.02..0.3f64) {
        let n_max = 2048;
        let first = (1..=n_max / step).map(|m| m * step).find(|&n| {
            fluxes.iter().all(|w| {
                let x = n as f64 * w;
                (x - x.round()).abs() <= eps
            })
        });
        match pigeonhole_search(&fluxes, n_max, eps, step) {
            Ok(r) => prop_assert_eq!(Some(r.n), first),
            Err(maglab::Error::NotFound) => prop_assert_eq!(first, None),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn field_json_round_trip(raw in prop::collection::vec(arb_charge(0.8), 0..6)) {
        let field = field_from(&raw);
        let back = PotentialField::from_json(&field.to_json()).unwrap();
        prop_assert_eq!(back, field);
    }

    #[test]
    fn extension_is_subharmonic(raw in prop::collection::vec(arb_charge(0.6), 1..4), seed in any::<u64>()) {
        // total flux below one, as for the scheduled potentials
        let scaled: Vec<_> = raw.iter().map(|&(r, t, rho, mu)| (r, t, rho, mu / raw.len() as f64)).collect();
        let field = field_from(&scaled);
        let psi = extend_to_psi(&field, Chi1::default(), Chi2Params::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let z = Complex64::from_polar(rng.random_range(1.0..1.999), rng.random_range(0.0..2.0 * PI));
            prop_assert!(psi.laplacian(z) > 0.0);
            let inner = Complex64::from_polar(rng.random_range(0.0..0.99), rng.random_range(0.0..2.0 * PI));
            prop_assert!((psi.laplacian(inner) - field.laplacian(inner)).abs() <= 1e-9 * field.laplacian(inner).abs().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn aharonov_bohm_periodicity_and_symmetry(j in 0i128..16) {
        let opts = EigenOptions { dense_cutoff: 2000, ..EigenOptions::default() };
        let lam = |num: i128| annulus_lambda(0.5, 1.0, Flux::new(num, 16), 26, &opts).unwrap().lambda;
        let base = lam(j);
        prop_assert!((lam(j + 16) - base).abs() <= 1e-9 * base);
        prop_assert!((lam(16 - j) - base).abs() <= 1e-9 * base);
    }
}

#[test]
fn strong_field_needs_more_extension_curvature() {
    let field = field_from(&[
        (0.2, 0.0, 0.1, 0.9),
        (0.3, 2.0, 0.1, 0.9),
        (0.4, 4.0, 0.1, 0.9),
    ]);
    let r = extend_to_psi(&field, Chi1::default(), Chi2Params::default());
    assert!(matches!(r, Err(maglab::Error::NotSubharmonic { .. })));
    let boosted = Chi2Params {
        boost: 600.0,
        ..Chi2Params::default()
    };
    assert!(extend_to_psi(&field, Chi1::default(), boosted).is_ok());
}

/// Independent union-find labelling with canonical (first-cell) ordering.
fn union_find_labels(values: &[f64], nx: usize, ny: usize) -> Vec<u32> {
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..values.len()).collect();
    for j in 0..ny {
        for i in 0..nx {
            let p = j * nx + i;
            if values[p].is_nan() || values[p] <= 0.0 {
                continue;
            }
            for q in [(i + 1 < nx).then(|| p + 1), (j + 1 < ny).then(|| p + nx)]
                .into_iter()
                .flatten()
            {
                if values[q] > 0.0 {
                    let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut ids: HashMap<usize, u32> = HashMap::new();
    (0..values.len())
        .map(|p| {
            if values[p].is_nan() || values[p] <= 0.0 {
                return 0;
            }
            let root = find(&mut parent, p);
            let next = ids.len() as u32 + 1;
            *ids.entry(root).or_insert(next)
        })
        .collect()
}

proptest! {
    #[test]
    fn labelling_matches_union_find(nx in 1usize..24, ny in 1usize..24, density in 0.1..0.8f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..nx * ny).map(|_| if rng.random::<f64>() < density { rng.random_range(0.1..2.0) } else { 0.0 }).collect();
        let l = label_components(&values, nx, ny, 0.1, 1.0).unwrap();
        prop_assert_eq!(&l.labels, &union_find_labels(&values, nx, ny));
        let total: usize = l.components.iter().map(|c| c.cells).sum();
        prop_assert_eq!(total, values.iter().filter(|v| **v > 0.0).count());
    }
}

#[test]
fn default_extension_of_scheduled_field_is_subharmonic() {
    let params = ThickSetParams::with_defaults(8, 2);
    let gens = build_generations(&params).unwrap();
    let parts: Vec<_> = (0..gens.len())
        .map(|i| build_subfamilies(&gens[i], &gens[..i], 1.0).unwrap())
        .collect();
    let schedule = schedule_mu(&gens, &parts, &params, 64, None).unwrap();
    let field = assemble_phi(&gens, &schedule, 2).unwrap();
    let psi = extend_to_psi(&field, Chi1::default(), Chi2Params::default()).unwrap();
    // five-point finite differences of ψ on the validator's 129² sample points
    let n = 129;
    let step = 4.0 / (n - 1) as f64;
    let mut checked = 0;
    for i in 0..n {
        for j in 0..n {
            let z = Complex64::new(-2.0 + i as f64 * step, -2.0 + j as f64 * step);
            let r = z.norm();
            if r <= 1.0 || r >= 2.0 {
                continue;
            }
            let h = 1e-4 * (2.0 - r);
            let v = |dz: Complex64| psi.phi(z + dz).unwrap();
            let fd = (v(Complex64::new(h, 0.0))
                + v(Complex64::new(-h, 0.0))
                + v(Complex64::new(0.0, h))
                + v(Complex64::new(0.0, -h))
                - 4.0 * v(Complex64::new(0.0, 0.0)))
                / (h * h);
            let lap = psi.laplacian(z);
            assert!(fd > -1e-4, "fd Laplacian {fd} at |z| = {r}");
            assert!(
                (fd - lap).abs() <= 1e-3 * lap.abs().max(0.1),
                "fd {fd} vs analytic {lap} at |z| = {r}"
            );
            checked += 1;
        }
    }
    assert!(checked > 9000);
    for &z in &[Complex64::new(0.3, -0.2), Complex64::new(-0.7, 0.69)] {
        assert!((psi.phi(z).unwrap() - field.phi(z).unwrap()).abs() < 1e-12);
    }
    // |z| = 1.9: χ₁ = 0 and χ₂ sits above the log tail up to its offset
    let c = Chi2::new(Chi2Params::default()).unwrap();
    let z = Complex64::from_polar(1.9, 0.4);
    assert!(psi.phi(z).unwrap() >= -0.5 * (4.0f64 - 3.61).ln() + c.offset.min(0.0) - 1e-9);
}

#[test]
fn scheduled_blocks_keep_flux_away_from_integers() {
    let params = ThickSetParams::with_defaults(8, 2);
    let gens = build_generations(&params).unwrap();
    let parts: Vec<_> = (0..gens.len())
        .map(|i| build_subfamilies(&gens[i], &gens[..i], 1.0).unwrap())
        .collect();
    let schedule = schedule_mu(&gens, &parts, &params, 64, None).unwrap();
    assert!(!schedule.blocks.is_empty());
    let quarter = Flux::new(1, 4);
    for b in &schedule.blocks {
        for n in b.n_lo..b.n_hi {
            let best = b
                .disks
                .iter()
                .map(|&j| dist_to_integers_exact(n, &schedule.mu[b.k - 1][j]))
                .max()
                .unwrap();
            assert!(best >= quarter, "n = {n}: max distance {best}");
        }
    }
}

#[test]
fn generations_match_brute_force_enumeration() {
    for b in [8u32, 9, 10] {
        let params = ThickSetParams::with_defaults(b, 2);
        let gens = build_generations(&params).unwrap();
        let mut prev: Vec<(Complex64, f64)> = Vec::new();
        for k in 1..=2usize {
            let eps = params.eps(k);
            let scale = (b as i64).pow(k as u32);
            let mut count = 0;
            for x in -scale..=scale {
                for y in -scale..=scale {
                    let z = Complex64::new(x as f64, y as f64) / scale as f64;
                    if z.norm() + eps > 1.0 + 1e-12 {
                        continue;
                    }
                    if prev
                        .iter()
                        .all(|&(c, rho)| (z - c).norm() > eps + rho + 1e-12)
                    {
                        count += 1;
                    }
                }
            }
            assert_eq!(gens[k - 1].len(), count, "B = {b}, k = {k}");
            prev.extend(gens[k - 1].centers.iter().map(|&c| (c, gens[k - 1].radius)));
        }
    }
}

#[test]
fn trial_function_vanishes_on_supports() {
    let params = ThickSetParams::with_defaults(8, 1);
    let gens = build_generations(&params).unwrap();
    let parts = vec![build_subfamilies(&gens[0], &[], 1.0).unwrap()];
    let schedule = schedule_mu(&gens, &parts, &params, 4, None).unwrap();
    let field = assemble_phi(&gens, &schedule, 1).unwrap();
    let grid = build_grid(&GridSpec::square(1.0, 1024, true, Mask::disk(1.0))).unwrap();
    let trial = trial_f(&gens, 1, &grid);
    let v = potential_values(&grid, &field, 1);
    let mut touched = 0;
    for ((f, z), v) in trial.samples.iter().zip(&grid.pos).zip(&v) {
        assert!(*f >= 0.0 && *f <= 1.0 - z.norm_sqr() + 1e-12);
        if *v > 0.0 {
            touched += 1;
            assert_eq!(*f, 0.0);
        }
    }
    assert!(touched > 0);
}
