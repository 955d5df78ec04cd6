use dziobek_core::solver::{
    canonical_key, cc_jacobian, cc_jacobian_full, cc_residual, dedup_classes,
    euler_collinear_oracle, isolation_check, mass_preserving_permutations, GaugeLayout,
};
use dziobek_core::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn candidates_meet_newton_tolerance() {
    let m = validate_masses(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    let mut o = SolveOptions::for_bodies(4);
    o.starts = 300;
    o.seed = 5;
    let cands = multistart_solve(&m, PotentialParam::NEWTON, &o).unwrap();
    assert!(!cands.is_empty());
    for c in &cands {
        let f = cc_residual(&c.configuration, &m, PotentialParam::NEWTON).unwrap();
        assert!(f.amax() < o.newton_tol);
        assert_eq!(c.residual_norm, f.amax());
        assert_eq!(c.configuration.dim(), 2);
    }
}

#[test]
fn every_class_certifies_and_recertifies() {
    let tols = Tolerances::default();
    for (n, a) in [(3, -1.5), (4, -1.5), (4, -0.5), (5, -1.0)] {
        let a = PotentialParam::new(a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let m: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..2.0)).collect();
        let m = validate_masses(&m).unwrap();
        let mut o = SolveOptions::for_bodies(n);
        o.starts = 400;
        let classes = enumerate_classes(&m, a, &o, &tols).unwrap();
        assert!(!classes.is_empty());
        for c in &classes {
            assert!(
                c.certificate.accepted(),
                "n={n}: {:?}",
                c.certificate.failures
            );
            let again = certify(&c.representative, &m, a, &tols).unwrap();
            assert_eq!(again, c.certificate);
        }
    }
}

#[test]
fn three_body_classes_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let m: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
        let m = validate_masses(&m).unwrap();
        let mut o = SolveOptions::for_bodies(3);
        o.starts = 600;
        let classes =
            enumerate_classes(&m, PotentialParam::NEWTON, &o, &Tolerances::default()).unwrap();
        let oracle = euler_collinear_oracle(&m, PotentialParam::NEWTON).unwrap();
        assert_eq!(classes.len(), 3);
        for s in &oracle {
            let target = s.distances.pairs();
            let hit = classes.iter().any(|c| {
                c.representative
                    .pair_distances()
                    .iter()
                    .zip(&target)
                    .all(|(p, q)| relative_close(*p, *q, 1e-8))
            });
            assert!(hit, "oracle triple {target:?} not found");
        }
    }
}

#[test]
fn oracle_solutions_for_unequal_masses_are_distinct() {
    let m = validate_masses(&[1.0, 2.0, 3.0]).unwrap();
    let sols = euler_collinear_oracle(&m, PotentialParam::NEWTON).unwrap();
    for s in &sols {
        let f = cc_residual(&s.configuration, &m, PotentialParam::NEWTON).unwrap();
        assert!(f.amax() < 1e-10);
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            assert_ne!(
                sorted(sols[i].distances.pairs()),
                sorted(sols[j].distances.pairs())
            );
        }
    }
}

#[test]
fn equal_mass_oracle_triples_are_congruent() {
    let m = MassVector::equal(3).unwrap();
    let sols = euler_collinear_oracle(&m, PotentialParam::NEWTON).unwrap();
    let first = sorted(sols[0].distances.pairs());
    for s in &sols[1..] {
        for (p, q) in sorted(s.distances.pairs()).iter().zip(&first) {
            assert!(relative_close(*p, *q, 1e-12));
        }
    }
}

#[test]
fn multistart_is_deterministic_across_pools() {
    let m = validate_masses(&[0.3, 0.9, 1.4, 0.6]).unwrap();
    let mut o = SolveOptions::for_bodies(4);
    o.starts = 200;
    o.seed = 17;
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| multistart_solve(&m, PotentialParam::NEWTON, &o).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn dedup_ignores_relabeling_of_equal_masses() {
    let m = MassVector::equal(4).unwrap();
    let mut o = SolveOptions::for_bodies(4);
    o.starts = 100;
    let cands = multistart_solve(&m, PotentialParam::NEWTON, &o).unwrap();
    let perms = mass_preserving_permutations(&m).unwrap();
    let classes = dedup_classes(&cands, &m, o.dedup_tol);
    assert_eq!(
        classes.iter().map(|c| c.multiplicity).sum::<usize>(),
        cands.len()
    );
    for c in &classes {
        let x = &c.representative.configuration;
        let relabeled =
            Configuration::new(DMatrix::from_fn(2, 4, |r, b| x.coords()[(r, (b + 1) % 4)]))
                .unwrap();
        let k = canonical_key(&relabeled.distance_matrix(), Some(&perms), o.dedup_tol);
        for (p, q) in k.iter().zip(&c.canonical_key) {
            assert!((p - q).abs() < 1e-12);
        }
    }
    for w in classes.windows(2) {
        assert!(w[0].canonical_key < w[1].canonical_key);
    }
}

#[test]
fn reduced_jacobian_is_a_submatrix_of_the_full_one() {
    let x = Configuration::from_points(&[
        vec![0.0, 0.0],
        vec![1.1, 0.0],
        vec![0.3, 0.8],
        vec![-0.5, 0.4],
    ])
    .unwrap();
    let m = validate_masses(&[1.0, 0.5, 2.0, 1.5]).unwrap();
    let a = PotentialParam::NEWTON;
    let full = cc_jacobian_full(&x, &m, a).unwrap();
    let reduced = cc_jacobian(&x, &m, a).unwrap();
    let layout = GaugeLayout::dziobek(4);
    assert_eq!(reduced.nrows(), layout.len());
    assert_eq!(reduced, layout.restrict_matrix(&full));
    // Rigid translations are in the kernel of the full Jacobian.
    let t = DVector::from_fn(8, |k, _| if k % 2 == 0 { 1.0 } else { 0.0 });
    assert!((&full * t).amax() < 1e-12);
}

#[test]
fn known_fixtures_are_isolated_only_off_the_degenerate_case() {
    let m = MassVector::equal(4).unwrap();
    for (a, expect_center) in [
        (PotentialParam::NEWTON, true),
        (PotentialParam::VORTEX, false),
    ] {
        for (x, label) in known_solutions(4, a).unwrap() {
            let iso = isolation_check(&x, &m, a, 1e-6).unwrap();
            if label == "square" {
                assert!(iso);
            } else {
                assert_eq!(iso, expect_center, "{label}");
            }
        }
    }
}
