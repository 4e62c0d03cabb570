//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so the verdict lines are never
//! captured. A FAIL line does not abort the run: criteria the model cannot
//! meet are reported with their measured numbers instead.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::time::Instant;

use gaugechain::exact::{dense_propagator, evolve_krylov, prepare_initial, StateVector};
use gaugechain::experiments::{eigen_scatter, evolve, ground_state_gauss, sweep_alpha, sweep_theta};
use gaugechain::hamiltonian::{build_effective, build_full, rotate_frame, OperatorSum};
use gaugechain::measurement::{
    apply_readout_error, correct_marginals, crosstalk_compensate, sample_shots, Basis, CrosstalkMatrix, ReadoutModel,
};
use gaugechain::model::{
    device_default, half_open_grid, time_grid, uniform_params, Boundary, HamiltonianKind, InitialStateSpec,
    ParamsSpec, Preset, RunConfig,
};
use gaugechain::mps::{initial_mps, tebd_evolve, DmrgParams, TebdParams};
use gaugechain::observables::{
    extended_imbalance, gauge_generator, gauge_value, gauss_f, gauss_sign, steady_value, ObservableSeries,
    QuantumState,
};

const SM_HZ: f64 = -4.45;

fn report(n: u32, pass: bool, what: &str, t0: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict}  {what}  [{:.1}s]", t0.elapsed().as_secs_f64());
}

fn device_quench(h_x: f64, v_even: f64, theta: f64) -> RunConfig {
    let mut c = RunConfig::new(HamiltonianKind::Full, InitialStateSpec::new("00100", theta).unwrap());
    c.params.h_x = Some(h_x);
    c.params.v_even = Some(v_even);
    c
}

fn effective(n: usize, pattern: &str, theta: f64, h_z: f64) -> RunConfig {
    let mut c = RunConfig::new(HamiltonianKind::Effective, InitialStateSpec::new(pattern, theta).unwrap());
    c.params = ParamsSpec { preset: Preset::Uniform, n_sites: Some(n), h_z: Some(h_z), ..ParamsSpec::default() };
    c
}

fn steady(cfg: &RunConfig) -> f64 {
    evolve(cfg).unwrap().steady_imbalance(cfg.steady_window).unwrap().0
}

fn criterion_1() {
    let t0 = Instant::now();
    let loc = steady(&device_quench(6.0, 15.0, -FRAC_PI_3));
    let deloc = steady(&device_quench(2.0, 0.0, -FRAC_PI_3));
    let flipped = steady(&device_quench(6.0, 15.0, PI));
    let pass = loc - deloc >= 0.3 && loc - flipped >= 0.2;
    report(
        1,
        pass,
        &format!("I(localized) − I(delocalized) = {:.3} (need ≥ 0.3), I(−π/3) − I(π) = {:.3} (need ≥ 0.2)", loc - deloc, loc - flipped),
        t0,
    );
}

fn criterion_2() {
    let t0 = Instant::now();
    let cfg = device_quench(6.0, 15.0, -FRAC_PI_3);
    let s = sweep_theta(&cfg, &half_open_grid(-PI, PI, 25), 0).unwrap();
    let pass = !s.fit.degenerate && (s.fit.mu + 0.35).abs() <= 0.15;
    report(2, pass, &format!("Gaussian peak at θ = {:.3} (need −0.35 ± 0.15)", s.fit.mu), t0);
}

fn criterion_3() {
    let t0 = Instant::now();
    let alphas = half_open_grid(-FRAC_PI_2, FRAC_PI_2, 25);
    // Identity: window mean of ⟨Ĝ(α)⟩(t) taken directly at each α versus the
    // three-parameter sinusoid.
    let full = sweep_alpha(&device_quench(6.0, 15.0, -FRAC_PI_3), 3, &alphas, None).unwrap();
    let w = (0.2, 1.0);
    let mut identity: f64 = 0.0;
    for &a in &alphas {
        let g: Vec<f64> = full.correlators.iter().map(|c| gauge_value(c, a)).collect();
        let direct = steady_value(&ObservableSeries::new("G", full.times.clone(), g).unwrap(), w).unwrap().0;
        identity = identity.max((direct - full.curve.value(a)).abs());
    }
    let eff = sweep_alpha(&effective(10, "00100", -FRAC_PI_3, SM_HZ), 3, &alphas, None).unwrap();
    let beta = (SM_HZ / 6.0).atan();
    let off = (eff.curve.alpha_star - beta).abs();
    let pass = identity < 1e-12 && off < 0.1;
    report(
        3,
        pass,
        &format!("sinusoid identity error {identity:.1e} (need < 1e-12), |α* − β| = {off:.4} with α* = {:.4} (need < 0.1)", eff.curve.alpha_star),
        t0,
    );
}

fn criterion_4() {
    let t0 = Instant::now();
    let alphas = half_open_grid(-FRAC_PI_2, FRAC_PI_2, 25);
    let w = [0.2, 1.0];
    let full = sweep_alpha(&device_quench(6.0, 15.0, -FRAC_PI_3), 3, &alphas, None).unwrap();
    let eff = sweep_alpha(&effective(10, "00100", -FRAC_PI_3, SM_HZ), 3, &alphas, None).unwrap();
    let (mf, pf) = full.plateau(w).unwrap();
    let (_, pe) = eff.plateau(w).unwrap();
    let pass = mf.abs() > 0.2 && pe < 0.05 && pf >= 3.0 * pe;
    report(
        4,
        pass,
        &format!("full: mean {mf:.3}, peak-to-peak {pf:.4}; effective: peak-to-peak {pe:.4}; ratio {:.1} (need |mean| > 0.2, eff < 0.05, ratio ≥ 3)", pf / pe),
        t0,
    );
}

fn criterion_5() {
    let t0 = Instant::now();
    let pattern: String = (0..20).map(|k| if k == 10 { '1' } else { '0' }).collect();
    let mut res = Vec::new();
    for h_z in [SM_HZ, 0.0] {
        let g = ground_state_gauss(&effective(40, &pattern, 0.0, h_z), &DmrgParams::default()).unwrap();
        res.push((g.max_residual, g.converged));
    }
    let (sm, free) = (res[0], res[1]);
    let pass = sm.1 && free.1 && sm.0 < 0.05 && free.0 >= 2.0 * sm.0;
    report(
        5,
        pass,
        &format!(
            "L = 40, χ 128: max residual {:.4} at h_z = −4.45 (need < 0.05), {:.4} at h_z = 0 (need ≥ 2×); converged {} / {}",
            sm.0, free.0, sm.1, free.1
        ),
        t0,
    );
}

fn criterion_6() {
    let t0 = Instant::now();
    let s = eigen_scatter(&effective(6, "010", 0.0, SM_HZ)).unwrap();
    let (lo, hi) = s.tail_means(0.1);
    let pass = lo * 3.0 <= hi;
    report(6, pass, &format!("mean residual lowest 10% {lo:.4}, highest 10% {hi:.4}, ratio {:.2} (need ≥ 3)", hi / lo), t0);
}

fn criterion_7() {
    let t0 = Instant::now();
    let p = uniform_params(8, 1.8, 1.1, 0.7, 6.0, SM_HZ).unwrap();
    let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
    let spec = InitialStateSpec::new("0010", -FRAC_PI_3).unwrap();
    let times = time_grid(8.0, 0.05);
    let exact = evolve_krylov(&h, &prepare_initial::<f64>(&spec, 8).unwrap(), &times, 30).unwrap();
    let (mps, _) = tebd_evolve(&h, &initial_mps::<f64>(&spec, 8).unwrap(), &times, &TebdParams::default()).unwrap();
    let mut err: f64 = 0.0;
    for (a, b) in exact.iter().zip(&mps) {
        for j in 1..=8 {
            err = err.max((a.population(j) - QuantumState::population(b, j).unwrap()).abs());
        }
    }
    let mut fid: f64 = 1.0;
    for n in [4, 6, 8] {
        let h = build_effective::<f64>(&uniform_params(n, 1.8, 1.1, 0.7, 6.0, SM_HZ).unwrap(), Boundary::Open).unwrap();
        let pat: String = (0..n / 2).map(|k| if k == n / 4 { '1' } else { '0' }).collect();
        let psi0 = prepare_initial::<f64>(&InitialStateSpec::new(&pat, -FRAC_PI_3).unwrap(), n).unwrap();
        for t in [0.3, 2.0] {
            let v = dense_propagator(&h, t).unwrap() * nalgebra::DVector::from_column_slice(psi0.amplitudes());
            let d = StateVector::from_amplitudes(n, v.as_slice().to_vec()).unwrap();
            let k = evolve_krylov(&h, &psi0, &[0.0, t], 30).unwrap().pop().unwrap();
            fid = fid.min(k.fidelity(&d));
        }
    }
    let pass = err < 1e-5 && fid > 1.0 - 1e-9;
    report(
        7,
        pass,
        &format!("TEBD vs Krylov max |ΔP| {err:.2e} over t ≤ 8 μs (need < 1e-5); Krylov vs dense 1 − F = {:.1e} (need < 1e-9)", 1.0 - fid),
        t0,
    );
}

/// Compact rerun of the property suites that need no figure-level runs.
fn criterion_8() {
    let t0 = Instant::now();
    let mut failed = Vec::new();

    // Norm and energy conservation.
    let p = uniform_params(6, 1.8, 1.1, 0.7, 6.0, SM_HZ).unwrap();
    let h = build_effective::<f64>(&p, Boundary::Open).unwrap();
    let psi0 = prepare_initial::<f64>(&InitialStateSpec::new("010", 0.7).unwrap(), 6).unwrap();
    let e0 = psi0.expectation(&h).unwrap().re;
    let ok = evolve_krylov(&h, &psi0, &[0.0, 0.5, 3.0], 30).unwrap().iter().all(|s| {
        (s.norm() - 1.0).abs() < 1e-10 && (s.expectation(&h).unwrap().re - e0).abs() < 1e-8 * e0.abs().max(1.0)
    });
    if !ok {
        failed.push("conservation");
    }

    // Spectral invariance under the frame rotation.
    let r = rotate_frame(&h, p.beta()).unwrap();
    let (a, b) = (gaugechain::exact::diagonalize_dense(&h).unwrap(), gaugechain::exact::diagonalize_dense(&r).unwrap());
    if a.energies().iter().zip(b.energies()).any(|(x, y)| (x - y).abs() >= 1e-10) {
        failed.push("rotate_frame spectrum");
    }

    // Ĝ² = 1.
    for alpha in [-1.3, 0.0, 0.4, 2.9] {
        let g = gauge_generator::<f64>(3, alpha, 10).unwrap();
        let d = g.mul(&g).unwrap().sub(&OperatorSum::identity(10)).unwrap().normalize().norm();
        if d >= 1e-12 {
            failed.push("G² = 1");
        }
    }

    // Imbalance bounds.
    let bits = [false, true, false, false, true];
    for prof in [[0.0; 5], [1.0; 5], [0.2, 0.9, 0.1, 0.0, 0.7], [1.0, 0.0, 1.0, 1.0, 0.0]] {
        let v = extended_imbalance(&prof, &bits).unwrap();
        if !(-1.0..=1.0).contains(&v) {
            failed.push("imbalance bounds");
        }
    }

    // Integrality of the Gauss exponent.
    for i in 1..=20usize {
        for j in i..=20usize {
            let twice = (j - i + 1) * (j + i + 2);
            let sign = if (twice / 2) % 2 == 0 { 1 } else { -1 };
            if twice % 2 != 0 || gauss_f(i, j) as usize * 2 != twice || gauss_sign(i, j) != sign {
                failed.push("f(i, j) integrality");
            }
        }
    }

    // Readout corruption and correction at 10⁵ shots.
    let hf = build_full::<f64>(&device_default()).unwrap();
    let psi = evolve_krylov(&hf, &prepare_initial::<f64>(&InitialStateSpec::new("00100", -1.0).unwrap(), 10).unwrap(), &[0.0, 0.3], 30)
        .unwrap()
        .pop()
        .unwrap();
    let counts = sample_shots(&psi, &[Basis::Z; 10], 100_000, 11).unwrap();
    let noisy = apply_readout_error(&counts, &ReadoutModel::device(), 12).unwrap();
    let fixed = correct_marginals(&noisy.marginals(), &ReadoutModel::device()).unwrap();
    let readout = (1..=10).map(|j| (fixed.probs[j - 1] - psi.population(j)).abs()).fold(0.0, f64::max);
    if readout >= 0.01 {
        failed.push("readout unbiasedness");
    }

    // Crosstalk round trip.
    let m = CrosstalkMatrix::device();
    let z: Vec<f64> = (0..10).map(|k| 0.13 * k as f64 - 0.5).collect();
    let felt = m.felt(&crosstalk_compensate(&z, &m).unwrap()).unwrap();
    let xt = felt.iter().zip(&z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if xt >= 1e-12 {
        failed.push("crosstalk round trip");
    }

    failed.dedup();
    let what = if failed.is_empty() {
        format!("all property checks green (readout error {readout:.4}, crosstalk error {xt:.1e})")
    } else {
        format!("failed: {}", failed.join(", "))
    };
    report(8, failed.is_empty(), &what, t0);
}

fn main() {
    // `cargo test -- <filter>` passes libtest arguments; a numeric filter
    // selects single criteria.
    let picks: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let all: [(u32, fn()); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    for (n, f) in all {
        if picks.is_empty() || picks.contains(&n) {
            f();
        }
    }
}
