use gaugechain::exact::{
    dense_propagator, diagonalize_dense, diagonalize_sector, evolve_in_sector, evolve_krylov, prepare_initial,
    KrylovPropagator, SparseOperator, StateVector,
};
use gaugechain::hamiltonian::{build_effective, build_full, OperatorSum, Pauli};
use gaugechain::model::{device_default, time_grid, uniform_params, Boundary, InitialStateSpec};
use gaugechain::mps::{dmrg_ground_state, initial_mps, tebd_evolve, DmrgParams, TebdParams};
use gaugechain::observables::QuantumState;

fn sm(n: usize) -> gaugechain::model::DeviceParams {
    uniform_params(n, 1.8, 1.1, 0.7, 6.0, -4.45).unwrap()
}

#[test]
fn krylov_matches_dense_exponential() {
    let h = build_effective::<f64>(&sm(8), Boundary::Open).unwrap();
    let psi0 = prepare_initial::<f64>(&InitialStateSpec::new("0010", -1.0).unwrap(), 8).unwrap();
    for t in [0.13, 0.9, 2.5] {
        let u = dense_propagator(&h, t).unwrap();
        let v = &u * nalgebra::DVector::from_column_slice(psi0.amplitudes());
        let exact = StateVector::from_amplitudes(8, v.as_slice().to_vec()).unwrap();
        let kr = evolve_krylov(&h, &psi0, &[0.0, t], 30).unwrap().pop().unwrap();
        assert!(kr.fidelity(&exact) > 1.0 - 1e-9, "t = {t}: {}", kr.fidelity(&exact));
    }
}

#[test]
fn full_model_krylov_matches_dense() {
    let h = build_full::<f64>(&device_default()).unwrap();
    let psi0 = prepare_initial::<f64>(&InitialStateSpec::new("00100", -1.0).unwrap(), 10).unwrap();
    let t = 0.05;
    let u = dense_propagator(&h, t).unwrap();
    let v = &u * nalgebra::DVector::from_column_slice(psi0.amplitudes());
    let exact = StateVector::from_amplitudes(10, v.as_slice().to_vec()).unwrap();
    let kr = evolve_krylov(&h, &psi0, &[0.0, t], 30).unwrap().pop().unwrap();
    assert!(kr.fidelity(&exact) > 1.0 - 1e-9);
}

#[test]
fn two_site_rabi_oscillation() {
    // g(σ⁺σ⁻ + h.c.) = g/2 (XX + YY); a full swap takes 1/(4g) μs.
    let g = 12.0;
    let h = OperatorSum::single(2, g / 2.0, &[(1, Pauli::X), (2, Pauli::X)])
        .unwrap()
        .add(&OperatorSum::single(2, g / 2.0, &[(1, Pauli::Y), (2, Pauli::Y)]).unwrap())
        .unwrap();
    let psi0 = StateVector::<f64>::basis_state(2, 0b10).unwrap();
    let times = time_grid(0.1, 0.004);
    let out = evolve_krylov(&h, &psi0, &times, 10).unwrap();
    for (t, psi) in times.iter().zip(&out) {
        let want = (2.0 * std::f64::consts::PI * g * t).cos().powi(2);
        assert!((psi.population(1) - want).abs() < 1e-10, "t = {t}");
    }
    let swap = evolve_krylov(&h, &psi0, &[0.0, 1.0 / (4.0 * g)], 10).unwrap();
    assert!((swap[1].population(2) - 1.0).abs() < 1e-10);
}

#[test]
fn time_reversal_returns_the_initial_state() {
    let h = build_full::<f64>(&device_default()).unwrap();
    let op = SparseOperator::full(&h).unwrap();
    let psi0 = prepare_initial::<f64>(&InitialStateSpec::new("00100", -1.047).unwrap(), 10).unwrap();
    let mut prop = KrylovPropagator::new(&op, 30, 1e-12).unwrap();
    let mut v = psi0.amplitudes().to_vec();
    prop.advance(&mut v, 0.4).unwrap();
    prop.advance(&mut v, -0.4).unwrap();
    let back = StateVector::from_amplitudes(10, v).unwrap();
    assert!(back.fidelity(&psi0) > 1.0 - 1e-8);
}

#[test]
fn sector_evolution_matches_full_space() {
    let h = build_effective::<f64>(&sm(8), Boundary::Open).unwrap();
    let psi0 = StateVector::<f64>::basis_state(8, 0b0000_1000).unwrap();
    let times = [0.0, 0.3, 1.2];
    let a = evolve_krylov(&h, &psi0, &times, 30).unwrap();
    let b = evolve_in_sector(&h, &psi0, &times, 30).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(x.fidelity(y) > 1.0 - 1e-10);
    }
}

#[test]
fn tebd_tracks_krylov_on_a_short_chain() {
    let h = build_effective::<f64>(&sm(6), Boundary::Open).unwrap();
    let spec = InitialStateSpec::new("010", -1.0).unwrap();
    let times = time_grid(1.0, 0.05);
    let exact = evolve_krylov(&h, &prepare_initial::<f64>(&spec, 6).unwrap(), &times, 30).unwrap();
    let (mps, stats) = tebd_evolve(&h, &initial_mps::<f64>(&spec, 6).unwrap(), &times, &TebdParams::default()).unwrap();
    assert_eq!(stats.saturations, 0);
    for (a, b) in exact.iter().zip(&mps) {
        for j in 1..=6 {
            let pb = QuantumState::population(b, j).unwrap();
            assert!((a.population(j) - pb).abs() < 1e-6, "site {j}");
        }
    }
}

#[test]
fn dmrg_energy_is_variational() {
    let p = sm(10);
    let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
    // Five matter sites at Σ sᶻ = 1: three excitations.
    let exact = diagonalize_sector(&h, 3).unwrap().energies()[0];
    let r = dmrg_ground_state::<f64>(&h, &DmrgParams::default()).unwrap();
    assert!(r.converged);
    assert!(r.energy >= exact - 1e-8, "{} below {exact}", r.energy);
    assert!(r.energy - exact < 1e-7 * exact.abs());
    // The ground state of the whole space need not be at this filling.
    assert!(diagonalize_dense(&h).unwrap().energies()[0] <= exact + 1e-9);
}

#[test]
fn norm_is_conserved_by_tebd() {
    let h = build_effective::<f64>(&sm(8), Boundary::Open).unwrap();
    let spec = InitialStateSpec::new("0010", 0.4).unwrap();
    let (out, _) = tebd_evolve(&h, &initial_mps::<f64>(&spec, 8).unwrap(), &[0.0, 0.5, 1.0], &TebdParams::default()).unwrap();
    for m in &out {
        assert!((m.norm() - 1.0).abs() < 1e-8);
        let e = QuantumState::expect(m, &h).unwrap().re;
        let e0 = QuantumState::expect(&out[0], &h).unwrap().re;
        assert!((e - e0).abs() < 1e-5 * e0.abs().max(1.0), "{e} vs {e0}");
    }
}
