//! End-to-end pipelines behind each figure: build the Hamiltonian from a
//! [`RunConfig`], evolve or diagonalize, and reduce to tables.
//!
//! Sweeps run their grid points on a bounded rayon pool; results keep grid
//! order whatever the completion order.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::exact::{diagonalize_dense, prepare_initial, KrylovPropagator, SparseOperator, StateVector};
use crate::hamiltonian::{build_effective, build_full, build_rotated_effective, OperatorSum};
use crate::measurement::{apply_readout_error, correct_marginals, sample_shots, stream_rng, Basis, ReadoutModel};
use crate::model::{n_matter, DeviceParams, EngineKind, HamiltonianKind, RunConfig};
use crate::mps::{dmrg_ground_state, initial_mps, tebd_evolve_with, DmrgParams, TebdParams, TebdStats};
use crate::observables::{
    extended_imbalance, fit_gaussian_peak, gauge_curve, gauge_value, gauss_residual, gauss_sign, meanfield_residual,
    measure_correlators, steady_value, GaugeAnsatzCurve, GaugeCorrelators, GaussianFit, ObservableSeries,
    QuantumState,
};
use crate::table::Table;

/// Gauge generator tracked by the α sweep.
pub const DEFAULT_ELL: usize = 3;

pub fn build_hamiltonian(kind: HamiltonianKind, params: &DeviceParams, cfg: &RunConfig) -> Result<OperatorSum<f64>> {
    let b = cfg.params.boundary;
    match kind {
        HamiltonianKind::Full => build_full(params),
        HamiltonianKind::Effective => build_effective(params, b),
        // The initial state is read in the rotated frame.
        HamiltonianKind::RotatedEffective => build_rotated_effective(params, b)?.total(),
    }
}

/// Evolves the configured quench and calls `observe` at every sample time.
pub fn run_trajectory<F>(cfg: &RunConfig, mut observe: F) -> Result<Option<TebdStats>>
where
    F: FnMut(usize, f64, &dyn QuantumState<f64>) -> Result<()>,
{
    cfg.validate()?;
    let params = cfg.device_params()?;
    let h = build_hamiltonian(cfg.hamiltonian, &params, cfg)?;
    let times = cfg.sample_times();
    let ep = &cfg.engine_params;
    match cfg.engine {
        EngineKind::Exact => {
            h.ensure_hermitian()?;
            let op = SparseOperator::full(&h)?;
            let mut prop = KrylovPropagator::new(&op, ep.krylov_dim, ep.krylov_tol)?;
            let psi0 = prepare_initial::<f64>(&cfg.initial, params.n_sites)?;
            let mut amps = psi0.amplitudes().to_vec();
            let mut now = 0.0;
            for (k, &t) in times.iter().enumerate() {
                if t > now {
                    prop.advance(&mut amps, t - now)?;
                    now = t;
                }
                let psi = StateVector::from_amplitudes(params.n_sites, amps.clone())?;
                observe(k, t, &psi)?;
            }
            Ok(None)
        }
        EngineKind::Tebd => {
            let psi0 = initial_mps::<f64>(&cfg.initial, params.n_sites)?;
            let tp = TebdParams { dt: ep.trotter_dt, chi_max: ep.chi_max, svd_tol: ep.svd_tol, ..TebdParams::default() };
            let mut k = 0;
            let stats = tebd_evolve_with(&h, &psi0, &times, &tp, |t, psi| {
                observe(k, t, psi)?;
                k += 1;
                Ok(())
            })?;
            if stats.saturations > 0 {
                log::warn!("tebd: {} truncations hit chi_max = {}", stats.saturations, ep.chi_max);
            }
            Ok(Some(stats))
        }
    }
}

/// Seed of grid point or time sample `index`, independent across indices.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    stream_rng(seed, 16 + index).random()
}

/// Shot estimates of the matter populations.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledProfile {
    /// Measured `|1⟩` frequencies, readout error included when enabled.
    pub raw: Vec<Vec<f64>>,
    /// Readout-corrected frequencies; equal to `raw` without readout error.
    pub corrected: Vec<Vec<f64>>,
    /// Mass removed by clipping during correction, per time.
    pub clipped: Vec<f64>,
}

/// Occupation dynamics of matter sites.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub times: Vec<f64>,
    /// Odd sites `1, 3, …`.
    pub sites: Vec<usize>,
    /// `P_j(t)` per time, one entry per site in `sites`.
    pub profiles: Vec<Vec<f64>>,
    pub imbalance: Vec<f64>,
    pub sampled: Option<SampledProfile>,
    pub stats: Option<TebdStats>,
}

impl Evolution {
    /// Steady imbalance `(mean, std)` over the configured window.
    pub fn steady_imbalance(&self, window: [f64; 2]) -> Result<(f64, f64)> {
        let s = ObservableSeries::new("imbalance", self.times.clone(), self.imbalance.clone())?;
        steady_value(&s, (window[0], window[1]))
    }
}

fn matter_profile(psi: &dyn QuantumState<f64>) -> Result<Vec<f64>> {
    (1..=psi.n_sites()).step_by(2).map(|j| Ok(psi.population(j)?.clamp(0.0, 1.0))).collect()
}

/// Occupation profile and imbalance along the quench, with the optional
/// shot-sampled readout.
pub fn evolve(cfg: &RunConfig) -> Result<Evolution> {
    let params = cfg.device_params()?;
    let pattern = cfg.initial.bits();
    let readout = match &cfg.sampling {
        Some(s) if s.readout_error => {
            let m = ReadoutModel::device();
            if m.n_qubits() < params.n_sites {
                return invalid(format!("device readout table covers {} qubits, chain has {}", m.n_qubits(), params.n_sites));
            }
            Some(m)
        }
        _ => None,
    };
    let mut ev = Evolution {
        times: Vec::new(),
        sites: (1..=params.n_sites).step_by(2).collect(),
        profiles: Vec::new(),
        imbalance: Vec::new(),
        sampled: cfg.sampling.as_ref().map(|_| SampledProfile { raw: vec![], corrected: vec![], clipped: vec![] }),
        stats: None,
    };
    let n = params.n_sites;
    let stats = run_trajectory(cfg, |k, t, psi| {
        let prof = matter_profile(psi)?;
        ev.imbalance.push(extended_imbalance(&prof, &pattern)?);
        ev.profiles.push(prof);
        ev.times.push(t);
        if let (Some(spec), Some(out)) = (&cfg.sampling, ev.sampled.as_mut()) {
            let sv = psi.to_dense()?;
            let seed = point_seed(cfg.rng_seed, k as u64);
            let mut counts = sample_shots(&sv, &vec![Basis::Z; n], spec.shots, seed)?;
            if let Some(m) = &readout {
                counts = apply_readout_error(&counts, m, seed)?;
            }
            let all = counts.marginals();
            let raw: Vec<f64> = (0..n).step_by(2).map(|q| all[q]).collect();
            let (corr, clipped) = match &readout {
                Some(m) => {
                    let c = correct_marginals(&all, m)?;
                    ((0..n).step_by(2).map(|q| c.probs[q]).collect(), c.clipped)
                }
                None => (raw.clone(), 0.0),
            };
            out.raw.push(raw);
            out.corrected.push(corr);
            out.clipped.push(clipped);
        }
        Ok(())
    })?;
    ev.stats = stats;
    Ok(ev)
}

/// Runs `f` over `0..n` on a pool of `workers` threads (0 lets rayon
/// choose), returning results in index order.
pub fn parallel_map<R, F>(n: usize, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Steady imbalance over a grid of initial-state angles.
#[derive(Clone, Debug)]
pub struct ThetaSweep {
    pub thetas: Vec<f64>,
    pub steady: Vec<f64>,
    pub steady_std: Vec<f64>,
    pub fit: GaussianFit<f64>,
}

/// `𝓘_∞(θ)` over `thetas`, then the Gaussian peak fit. Grids too short to
/// fit give a fit flagged degenerate.
pub fn sweep_theta(cfg: &RunConfig, thetas: &[f64], workers: usize) -> Result<ThetaSweep> {
    if thetas.is_empty() {
        return invalid("θ grid is empty");
    }
    let pts = parallel_map(thetas.len(), workers, |k| {
        let mut c = cfg.clone();
        c.initial.theta = thetas[k];
        c.sampling = None;
        let ev = evolve(&c)?;
        let v = ev.steady_imbalance(c.steady_window)?;
        log::info!("θ = {:+.4}: steady imbalance {:.4}", thetas[k], v.0);
        Ok(v)
    })?;
    let steady: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let fit = if thetas.len() < 5 {
        log::warn!("{} θ points cannot support a Gaussian fit", thetas.len());
        let (k, &m) = steady.iter().enumerate().fold((0, &f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        GaussianFit {
            mu: thetas[k],
            sigma: f64::NAN,
            amplitude: 0.0,
            offset: m,
            residual: f64::NAN,
            converged: false,
            degenerate: true,
            iterations: 0,
        }
    } else {
        fit_gaussian_peak(thetas, &steady)?
    };
    Ok(ThetaSweep { thetas: thetas.to_vec(), steady_std: pts.iter().map(|p| p.1).collect(), steady, fit })
}

/// Gauge curve of one generator and its time series at the extremum.
#[derive(Clone, Debug)]
pub struct AlphaSweep {
    pub ell: usize,
    pub times: Vec<f64>,
    pub correlators: Vec<GaugeCorrelators<f64>>,
    pub curve: GaugeAnsatzCurve<f64>,
    /// Angle of the time series, `α*` unless given explicitly.
    pub series_alpha: f64,
    /// `⟨Ĝ_ℓ(series_alpha)⟩(t)`.
    pub series: Vec<f64>,
}

impl AlphaSweep {
    /// `(mean, peak-to-peak)` of the time series inside `window`.
    pub fn plateau(&self, window: [f64; 2]) -> Result<(f64, f64)> {
        let s = ObservableSeries::new("G", self.times.clone(), self.series.clone())?;
        let (mean, _) = steady_value(&s, (window[0], window[1]))?;
        let inside: Vec<f64> = self
            .times
            .iter()
            .zip(&self.series)
            .filter(|(t, _)| **t >= window[0] - 1e-9 && **t <= window[1] + 1e-9)
            .map(|(_, v)| *v)
            .collect();
        let hi = inside.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = inside.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok((mean, hi - lo))
    }
}

/// One trajectory records the four correlators of `Ĝ_ℓ`; the curve over
/// `alphas` follows exactly from their steady values. The time series is
/// taken at `series_alpha`, or at the fitted extremum when `None`.
pub fn sweep_alpha(cfg: &RunConfig, ell: usize, alphas: &[f64], series_alpha: Option<f64>) -> Result<AlphaSweep> {
    let mut times = Vec::new();
    let mut series = Vec::new();
    run_trajectory(cfg, |_, t, psi| {
        times.push(t);
        series.push(measure_correlators(psi, ell)?);
        Ok(())
    })?;
    let w = cfg.steady_window;
    let curve = gauge_curve(&times, &series, alphas, (w[0], w[1]))?;
    let a = series_alpha.unwrap_or(curve.alpha_star);
    let values = series.iter().map(|c| gauge_value(c, a)).collect();
    Ok(AlphaSweep { ell, times, correlators: series, curve, series_alpha: a, series: values })
}

/// Charge, flux and Gauss residual of one matter interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussPoint {
    pub i: usize,
    pub j: usize,
    pub charge: f64,
    pub flux: f64,
    pub sign: i32,
    pub residual: f64,
}

/// Matter intervals `[i, j]` with both bounding links in the chain.
pub fn gauss_intervals(n_sites: usize, boundary: crate::model::Boundary) -> Vec<(usize, usize)> {
    let nm = n_matter(n_sites);
    let lo = if boundary == crate::model::Boundary::Periodic { 1 } else { 2 };
    let hi = if 2 * nm <= n_sites { nm } else { nm - 1 };
    (lo..=hi).flat_map(|i| (i..=hi).map(move |j| (i, j))).collect()
}

fn gauss_points(psi: &dyn QuantumState<f64>, beta: f64, cfg: &RunConfig, pairs: &[(usize, usize)]) -> Result<Vec<GaussPoint>> {
    pairs
        .iter()
        .map(|&(i, j)| {
            let (r, w, c) = gauss_residual(psi, i, j, beta, cfg.params.boundary)?;
            Ok(GaussPoint { i, j, charge: w, flux: c, sign: gauss_sign(i, j), residual: r })
        })
        .collect()
}

/// Gauss-law check of a DMRG ground state.
#[derive(Clone, Debug)]
pub struct GroundStateGauss {
    pub energy: f64,
    pub converged: bool,
    pub max_bond: usize,
    pub max_discarded: f64,
    pub filling_defect: Option<f64>,
    pub points: Vec<GaussPoint>,
    pub max_residual: f64,
    /// `max_ℓ |λ_s − g sinβ ⟨τ̃ˣ⟩|`.
    pub meanfield: f64,
}

/// DMRG ground state of the effective model and `⟨W̃⟩`, `⟨C̃⟩` over every
/// interval from [`gauss_intervals`].
pub fn ground_state_gauss(cfg: &RunConfig, dmrg: &DmrgParams) -> Result<GroundStateGauss> {
    cfg.validate()?;
    if cfg.hamiltonian != HamiltonianKind::Effective {
        return invalid("the Gauss-law check needs the effective Hamiltonian in the lab frame");
    }
    let params = cfg.device_params()?;
    let h = build_effective::<f64>(&params, cfg.params.boundary)?;
    let res = dmrg_ground_state::<f64>(&h, dmrg)?;
    if !res.converged {
        log::warn!("ground state not converged; Gauss table uses the best state found");
    }
    let pairs = gauss_intervals(params.n_sites, cfg.params.boundary);
    let points = gauss_points(&res.state, params.beta(), cfg, &pairs)?;
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    Ok(GroundStateGauss {
        energy: res.energy,
        converged: res.converged,
        max_bond: res.state.max_bond(),
        max_discarded: res.max_discarded,
        filling_defect: res.filling_defect,
        max_residual,
        meanfield: meanfield_residual(&res.state, &params)?,
        points,
    })
}

/// Gauss-law residuals of every eigenstate.
#[derive(Clone, Debug)]
pub struct EigenScatter {
    pub intervals: Vec<(usize, usize)>,
    /// Ascending energies.
    pub energies: Vec<f64>,
    /// Per eigenstate, one point per interval.
    pub points: Vec<Vec<GaussPoint>>,
}

impl EigenScatter {
    /// Mean residual over the intervals of eigenstate `k`.
    pub fn mean_residual(&self, k: usize) -> f64 {
        let p = &self.points[k];
        p.iter().map(|x| x.residual).sum::<f64>() / p.len() as f64
    }

    /// Mean of [`Self::mean_residual`] over the lowest and the highest
    /// `fraction` of the spectrum (at least one state each).
    pub fn tail_means(&self, fraction: f64) -> (f64, f64) {
        let n = self.energies.len();
        let m = ((n as f64 * fraction).round() as usize).clamp(1, n);
        let avg = |r: std::ops::Range<usize>| r.clone().map(|k| self.mean_residual(k)).sum::<f64>() / r.len() as f64;
        (avg(0..m), avg(n - m..n))
    }
}

/// Full dense spectrum of the effective model with charge and flux of each
/// eigenstate.
pub fn eigen_scatter(cfg: &RunConfig) -> Result<EigenScatter> {
    cfg.validate()?;
    if cfg.hamiltonian != HamiltonianKind::Effective {
        return invalid("the eigenstate scatter needs the effective Hamiltonian in the lab frame");
    }
    let params = cfg.device_params()?;
    let h = build_effective::<f64>(&params, cfg.params.boundary)?;
    let survey = diagonalize_dense(&h)?;
    let intervals = gauss_intervals(params.n_sites, cfg.params.boundary);
    if intervals.is_empty() {
        return invalid(format!("a chain of {} sites has no interval with two bounding links", params.n_sites));
    }
    let points = (0..survey.len())
        .map(|k| gauss_points(&survey.state(k)?, params.beta(), cfg, &intervals))
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenScatter { intervals, energies: survey.energies().to_vec(), points })
}

/// Tables of one evolution: the profile, the imbalance, and the sampled
/// profile when shots were drawn.
pub fn evolution_tables(cfg: &RunConfig, ev: &Evolution) -> Result<Vec<Table>> {
    let cols: Vec<String> = std::iter::once("t".to_string()).chain(ev.sites.iter().map(|j| format!("P{j}"))).collect();
    let meta = |t: Table| {
        t.with_meta("hamiltonian", format!("{:?}", cfg.hamiltonian))
            .with_meta("engine", format!("{:?}", cfg.engine))
            .with_config(&cfg.to_toml_string())
    };
    let mut prof = meta(Table::new("profile", &cols));
    for (t, p) in ev.times.iter().zip(&ev.profiles) {
        prof.push(std::iter::once(*t).chain(p.iter().copied()).collect())?;
    }
    let mut imb = meta(Table::new("imbalance", &["t", "imbalance"]));
    for (t, v) in ev.times.iter().zip(&ev.imbalance) {
        imb.push(vec![*t, *v])?;
    }
    if ev.times.len() >= 2 && cfg.t_max > 0.0 {
        if let Ok((m, s)) = ev.steady_imbalance(cfg.steady_window) {
            imb = imb.with_meta("steady_mean", m).with_meta("steady_std", s);
        }
    }
    if let Some(st) = &ev.stats {
        imb = imb
            .with_meta("tebd_steps", st.steps)
            .with_meta("tebd_discarded", st.discarded)
            .with_meta("tebd_max_bond", st.max_bond);
    }
    let mut out = vec![prof, imb];
    if let Some(s) = &ev.sampled {
        let mut scols = cols.clone();
        scols.extend(ev.sites.iter().map(|j| format!("P{j}_corrected")));
        scols.push("clipped".into());
        let mut t = meta(Table::new("profile_shots", &scols));
        for k in 0..ev.times.len() {
            let row = std::iter::once(ev.times[k])
                .chain(s.raw[k].iter().copied())
                .chain(s.corrected[k].iter().copied())
                .chain(std::iter::once(s.clipped[k]))
                .collect();
            t.push(row)?;
        }
        out.push(t.with_meta("shots", cfg.sampling.as_ref().map_or(0, |x| x.shots)));
    }
    Ok(out)
}

pub fn theta_table(cfg: &RunConfig, s: &ThetaSweep) -> Result<Table> {
    let f = &s.fit;
    let mut t = Table::new("theta_sweep", &["theta", "steady_imbalance", "steady_std"])
        .with_meta("fit_mu", f.mu)
        .with_meta("fit_sigma", f.sigma)
        .with_meta("fit_amplitude", f.amplitude)
        .with_meta("fit_offset", f.offset)
        .with_meta("fit_residual", f.residual)
        .with_meta("fit_converged", f.converged)
        .with_meta("fit_degenerate", f.degenerate)
        .with_config(&cfg.to_toml_string());
    for k in 0..s.thetas.len() {
        t.push(vec![s.thetas[k], s.steady[k], s.steady_std[k]])?;
    }
    Ok(t)
}

pub fn alpha_tables(cfg: &RunConfig, s: &AlphaSweep) -> Result<Vec<Table>> {
    let c = &s.curve;
    let mut curve = Table::new("gauge_curve", &["alpha", "steady_G", "fit_G"])
        .with_meta("ell", s.ell)
        .with_meta("offset", c.offset)
        .with_meta("cos2a", c.cos_coeff)
        .with_meta("sin2a", c.sin_coeff)
        .with_meta("alpha_star", c.alpha_star)
        .with_meta("fit_residual", c.residual)
        .with_config(&cfg.to_toml_string());
    for (a, v) in c.alphas.iter().zip(&c.steady_values) {
        curve.push(vec![*a, *v, c.value(*a)])?;
    }
    let mut series = Table::new("gauge_series", &["t", "xzx", "xzz", "zzx", "zzz", "G"])
        .with_meta("ell", s.ell)
        .with_meta("alpha_star", c.alpha_star)
        .with_meta("series_alpha", s.series_alpha)
        .with_config(&cfg.to_toml_string());
    for k in 0..s.times.len() {
        let g = &s.correlators[k];
        series.push(vec![s.times[k], g.xzx, g.xzz, g.zzx, g.zzz, s.series[k]])?;
    }
    if let Ok((m, pp)) = s.plateau(cfg.steady_window) {
        series = series.with_meta("plateau_mean", m).with_meta("plateau_peak_to_peak", pp);
    }
    Ok(vec![curve, series])
}

pub fn ground_state_table(cfg: &RunConfig, dmrg: &DmrgParams, g: &GroundStateGauss) -> Result<Table> {
    let mut t = Table::new("gauss_ground_state", &["i", "j", "charge", "flux", "sign", "residual"])
        .with_meta("energy", g.energy)
        .with_meta("converged", g.converged)
        .with_meta("max_bond", g.max_bond)
        .with_meta("max_discarded", g.max_discarded)
        .with_meta("filling_defect", g.filling_defect.map_or("none".to_string(), |d| d.to_string()))
        .with_meta("max_residual", g.max_residual)
        .with_meta("meanfield_residual", g.meanfield)
        .with_meta("dmrg_chi_max", dmrg.chi_max)
        .with_meta("dmrg_max_sweeps", dmrg.max_sweeps)
        .with_config(&cfg.to_toml_string());
    for p in &g.points {
        t.push(vec![p.i as f64, p.j as f64, p.charge, p.flux, p.sign as f64, p.residual])?;
    }
    Ok(t)
}

pub fn eigen_scatter_table(cfg: &RunConfig, s: &EigenScatter) -> Result<Table> {
    let mut cols = vec!["k".to_string(), "energy".to_string()];
    for (i, j) in &s.intervals {
        cols.push(format!("W_{i}_{j}"));
        cols.push(format!("C_{i}_{j}"));
    }
    cols.push("mean_residual".into());
    let (lo, hi) = s.tail_means(0.1);
    let mut t = Table::new("eigen_scatter", &cols)
        .with_meta("low_decile_residual", lo)
        .with_meta("high_decile_residual", hi)
        .with_config(&cfg.to_toml_string());
    for k in 0..s.energies.len() {
        let mut row = vec![k as f64, s.energies[k]];
        for p in &s.points[k] {
            row.push(p.charge);
            row.push(p.flux);
        }
        row.push(s.mean_residual(k));
        t.push(row)?;
    }
    Ok(t)
}
