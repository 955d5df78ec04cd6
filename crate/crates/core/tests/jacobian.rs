//! Analytic Jacobians against central finite differences.

use dziobek_core::solver::{cc_jacobian, cc_jacobian_full, cc_residual, GaugeLayout};
use dziobek_core::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(n: usize, rng: &mut ChaCha8Rng) -> Configuration {
    let dim = n - 2;
    loop {
        let p = DMatrix::from_fn(dim, n, |_, _| rng.random_range(-1.2..1.2));
        let x = Configuration::new(p).unwrap();
        let d = x.pair_distances();
        if d.iter().all(|&r| r > 0.2) {
            return x;
        }
    }
}

fn fd_jacobian(x: &Configuration, m: &MassVector, a: PotentialParam) -> DMatrix<f64> {
    let (dim, n) = (x.dim(), x.n());
    let scale = x.coords().amax().max(1.0);
    let h = 1e-6 * scale;
    let mut jac = DMatrix::zeros(dim * n, dim * n);
    for b in 0..n {
        for q in 0..dim {
            let shift = |s: f64| {
                let mut p = x.coords().clone();
                p[(q, b)] += s;
                cc_residual(&Configuration::new(p).unwrap(), m, a).unwrap()
            };
            let col: DVector<f64> = (shift(h) - shift(-h)) / (2.0 * h);
            jac.set_column(b * dim + q, &col);
        }
    }
    jac
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [3, 4, 5] {
        for av in [-1.5, -1.0, -0.5] {
            let a = PotentialParam::new(av).unwrap();
            for _ in 0..20 {
                let x = random_point(n, &mut rng);
                let m: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
                let m = validate_masses(&m).unwrap();
                let exact = cc_jacobian_full(&x, &m, a).unwrap();
                let approx = fd_jacobian(&x, &m, a);
                let err = (&exact - &approx).amax() / exact.amax();
                assert!(err < 1e-6, "n={n} a={av}: relative error {err:e}");

                let layout = GaugeLayout::new(n, n - 2);
                let reduced = cc_jacobian(&x, &m, a).unwrap();
                let err = (&reduced - layout.restrict_matrix(&approx)).amax() / reduced.amax();
                assert!(err < 1e-6, "reduced n={n} a={av}: relative error {err:e}");
            }
        }
    }
}
