use gaugechain::exact::{diagonalize_dense, evolve_krylov, prepare_initial};
use gaugechain::hamiltonian::{build_effective, rotate_frame, OperatorSum, Pauli, PauliString};
use gaugechain::model::{uniform_params, Boundary, InitialStateSpec};
use gaugechain::observables::{extended_imbalance, gauge_generator, gauss_f, gauss_sign};
use num_complex::Complex;
use proptest::prelude::*;

const N: usize = 4;

fn pauli(k: u8) -> Pauli {
    [Pauli::X, Pauli::Y, Pauli::Z][k as usize % 3]
}

fn arb_sum() -> impl Strategy<Value = OperatorSum<f64>> {
    let term = (-2.0..2.0f64, -2.0..2.0f64, prop::collection::vec((1..=N, 0u8..3), 0..4));
    prop::collection::vec(term, 1..6).prop_map(|ts| {
        let terms = ts
            .into_iter()
            .map(|(re, im, ops)| {
                // Keep the first operator named for each site.
                let mut seen = [false; N + 1];
                let ops: Vec<_> = ops
                    .into_iter()
                    .filter(|(s, _)| !std::mem::replace(&mut seen[*s], true))
                    .map(|(s, p)| (s, pauli(p)))
                    .collect();
                PauliString::new(Complex::new(re, im), ops).unwrap()
            })
            .collect();
        OperatorSum::from_terms(N, terms).unwrap()
    })
}

fn distance(a: &OperatorSum<f64>, b: &OperatorSum<f64>) -> f64 {
    a.sub(b).unwrap().normalize().norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_is_idempotent(a in arb_sum()) {
        let once = a.clone().normalize();
        prop_assert_eq!(once.clone().normalize(), once);
    }

    #[test]
    fn rotate_frame_is_a_homomorphism(a in arb_sum(), b in arb_sum(), beta in -3.0..3.0f64) {
        let lhs = rotate_frame(&a.mul(&b).unwrap(), beta).unwrap();
        let rhs = rotate_frame(&a, beta).unwrap().mul(&rotate_frame(&b, beta).unwrap()).unwrap();
        prop_assert!(distance(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn rotate_frame_round_trips(a in arb_sum(), beta in -3.0..3.0f64) {
        let back = rotate_frame(&rotate_frame(&a, beta).unwrap(), -beta).unwrap();
        prop_assert!(distance(&back, &a.clone().normalize()) < 1e-10);
    }

    #[test]
    fn gauge_generator_squares_to_one(alpha in -4.0..4.0f64, ell in 2usize..=4) {
        let g = gauge_generator::<f64>(ell, alpha, 8).unwrap();
        let sq = g.mul(&g).unwrap();
        prop_assert!(distance(&sq, &OperatorSum::identity(8)) < 1e-12);
    }

    #[test]
    fn imbalance_is_bounded(
        profile in prop::collection::vec(0.0..=1.0f64, 5),
        bits in prop::collection::vec(any::<bool>(), 5),
    ) {
        prop_assume!(bits.iter().any(|&b| b) && bits.iter().any(|&b| !b));
        let v = extended_imbalance(&profile, &bits).unwrap();
        prop_assert!((-1.0..=1.0).contains(&v));
        let frozen: Vec<f64> = bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        prop_assert!((extended_imbalance(&frozen, &bits).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn krylov_conserves_norm_and_energy(theta in -3.14..3.14f64, hz in -6.0..6.0f64) {
        let p = uniform_params(6, 1.8, 1.1, 0.7, 6.0, hz).unwrap();
        let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
        let psi0 = prepare_initial::<f64>(&InitialStateSpec::new("010", theta).unwrap(), 6).unwrap();
        let e0 = psi0.expectation(&h).unwrap().re;
        let out = evolve_krylov(&h, &psi0, &[0.0, 0.37, 1.1], 30).unwrap();
        for psi in &out {
            prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
            prop_assert!((psi.expectation(&h).unwrap().re - e0).abs() < 1e-8 * e0.abs().max(1.0));
        }
    }
}

#[test]
fn rotate_frame_preserves_the_spectrum() {
    for hz in [-6.0, -4.45, 0.0, 3.0] {
        let p = uniform_params(6, 1.8, 1.1, 0.7, 6.0, hz).unwrap();
        let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
        let r = rotate_frame(&h, p.beta()).unwrap();
        let (a, b) = (diagonalize_dense(&h).unwrap(), diagonalize_dense(&r).unwrap());
        for (x, y) in a.energies().iter().zip(b.energies()) {
            assert!((x - y).abs() < 1e-10, "h_z = {hz}: {x} vs {y}");
        }
    }
}

#[test]
fn gauss_exponent_is_an_integer() {
    for i in 1..=20usize {
        for j in i..=20usize {
            let twice = (j - i + 1) * (j + i + 2);
            assert_eq!(twice % 2, 0, "({i}, {j})");
            assert_eq!(gauss_f(i, j) as usize * 2, twice);
            let want = if (twice / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(gauss_sign(i, j), want);
        }
    }
}
