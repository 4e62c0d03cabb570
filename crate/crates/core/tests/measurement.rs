use gaugechain::exact::{evolve_krylov, prepare_initial, StateVector};
use gaugechain::hamiltonian::build_full;
use gaugechain::measurement::{
    apply_readout_error, correct_marginals, crosstalk_compensate, gauge_correlators_from_shots, sample_shots, Basis,
    Counts, CrosstalkMatrix, ReadoutModel,
};
use gaugechain::model::{device_default, InitialStateSpec};
use gaugechain::observables::measure_correlators;
use proptest::prelude::*;

/// A spread-out device state with populations away from 0 and 1.
fn evolved_state() -> StateVector<f64> {
    let h = build_full::<f64>(&device_default()).unwrap();
    let psi0 = prepare_initial::<f64>(&InitialStateSpec::new("00100", -1.0).unwrap(), 10).unwrap();
    evolve_krylov(&h, &psi0, &[0.0, 0.3], 30).unwrap().pop().unwrap()
}

#[test]
fn readout_correction_is_unbiased() {
    let psi = evolved_state();
    let n = 100_000;
    let counts = sample_shots(&psi, &[Basis::Z; 10], n, 11).unwrap();
    let noisy = apply_readout_error(&counts, &ReadoutModel::device(), 12).unwrap();
    let fixed = correct_marginals(&noisy.marginals(), &ReadoutModel::device()).unwrap();
    for j in 1..=10 {
        let want = psi.population(j);
        let got = fixed.probs[j - 1];
        assert!((got - want).abs() < 0.01, "Q{j}: {got} vs {want}");
    }
}

#[test]
fn shot_noise_stays_within_four_sigma_bound() {
    let psi = evolved_state();
    for n in [500u64, 8000] {
        let counts = sample_shots(&psi, &[Basis::Z; 10], n, 3).unwrap();
        assert_eq!(counts.shots(), n);
        for j in 1..=10 {
            let err = (counts.marginal(j).unwrap() - psi.population(j)).abs();
            assert!(err <= 4.0 / (n as f64).sqrt(), "Q{j} at {n} shots: {err}");
        }
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let psi = evolved_state();
    let a = sample_shots(&psi, &[Basis::Z; 10], 1000, 5).unwrap();
    let b = sample_shots(&psi, &[Basis::Z; 10], 1000, 5).unwrap();
    let c = sample_shots(&psi, &[Basis::Z; 10], 1000, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(Counts::parse(&a.dump()).unwrap(), a);
}

#[test]
fn gauge_correlators_from_shots_track_exact_values() {
    let psi = evolved_state();
    let exact = measure_correlators(&psi, 3).unwrap();
    let n = 40_000;
    let tol = 4.0 / (n as f64).sqrt();
    for model in [None, Some(ReadoutModel::device())] {
        let est = gauge_correlators_from_shots(&psi, 3, n, 9, model.as_ref()).unwrap();
        // Per-qubit correction inflates the variance by at most the inverse
        // calibration gain.
        let slack = if model.is_some() { 2.0 } else { 1.0 };
        for (e, x) in [(est.xzx, exact.xzx), (est.xzz, exact.xzz), (est.zzx, exact.zzx), (est.zzz, exact.zzz)] {
            assert!((e - x).abs() < slack * tol, "{e} vs {x}");
        }
    }
}

#[test]
fn device_crosstalk_round_trip() {
    let m = CrosstalkMatrix::device();
    let z: Vec<f64> = (0..10).map(|k| 0.1 * k as f64 - 0.3).collect();
    let felt = m.felt(&crosstalk_compensate(&z, &m).unwrap()).unwrap();
    for (a, b) in felt.iter().zip(&z) {
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn crosstalk_round_trip_for_any_target(z in prop::collection::vec(-1.0..1.0f64, 10)) {
        let m = CrosstalkMatrix::device();
        let felt = m.felt(&crosstalk_compensate(&z, &m).unwrap()).unwrap();
        for (a, b) in felt.iter().zip(&z) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn corrected_marginals_are_probabilities(p in prop::collection::vec(0.0..=1.0f64, 10)) {
        let c = correct_marginals(&p, &ReadoutModel::device()).unwrap();
        prop_assert!(c.probs.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!(c.clipped >= 0.0);
    }
}
