//! Device parameters, site roles, initial states and run configuration.
//!
//! All couplings and fields are linear frequencies in MHz, stored exactly as
//! tabulated for the device. Propagators multiply by 2π, so a coefficient
//! `f` in MHz rotates phases at `2πf` rad/μs and times are in μs.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Seed used when a configuration does not name one.
pub const DEFAULT_SEED: u64 = 20_221_024;

/// Current version of the configuration schema.
pub const SCHEMA_VERSION: u32 = 1;

const DEVICE_G_NN: [f64; 9] = [12.05, 12.2, 11.90, 11.90, 11.90, 11.76, 11.90, 12.05, 12.35];
const DEVICE_LAMBDA: [f64; 8] = [1.10, 0.69, 1.10, 0.69, 1.10, 0.61, 1.10, 0.71];

/// Longitudinal field of matter qubits on the device.
pub const DEVICE_V_ODD: f64 = -80.0;
/// Longitudinal field of gauge qubits at the localized working point.
pub const DEVICE_V_EVEN: f64 = 15.0;
/// Drive amplitude at the localized working point.
pub const DEVICE_H_X: f64 = 6.0;
/// Effective three-body coupling, including its sign.
pub const DEVICE_G_EFF: f64 = -1.8;
/// Effective gauge field used by the homogeneous model.
pub const SM_H_Z: f64 = -4.45;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Couplings and fields of the chain. Lists are indexed from site 1, so
/// `g_nn[0]` couples sites 1 and 2.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceParams {
    pub n_sites: usize,
    /// `g_j` between `j` and `j+1`, `L-1` entries.
    pub g_nn: Vec<f64>,
    /// `λ_j` between `j` and `j+2`, `L-2` entries.
    pub lambda_nnn: Vec<f64>,
    /// `V_j`, `L` entries.
    pub v_long: Vec<f64>,
    pub h_x: f64,
    pub h_z: f64,
    /// `g̃_{s,ℓ}` for matter hops `ℓ → ℓ+1`, `N_m - 1` entries.
    pub g_eff_s: Vec<f64>,
    /// `g̃_{τ,ℓ}` for gauge hops across matter site `ℓ+1`, `N_m - 1` entries.
    pub g_eff_tau: Vec<f64>,
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let l = self.n_sites;
        if l < 3 {
            return invalid(format!("n_sites = {l}, need at least 3"));
        }
        let check = |name: &str, len: usize, want: usize| -> Result<()> {
            if len != want {
                invalid(format!("{name} has {len} entries, expected {want} for L = {l}"))
            } else {
                Ok(())
            }
        };
        check("g_nn", self.g_nn.len(), l - 1)?;
        check("lambda_nnn", self.lambda_nnn.len(), l - 2)?;
        check("v_long", self.v_long.len(), l)?;
        let n_links = self.n_matter().saturating_sub(1);
        check("g_eff_s", self.g_eff_s.len(), n_links)?;
        check("g_eff_tau", self.g_eff_tau.len(), n_links)?;
        let all = self
            .g_nn
            .iter()
            .chain(&self.lambda_nnn)
            .chain(&self.v_long)
            .chain(&self.g_eff_s)
            .chain(&self.g_eff_tau)
            .chain([&self.h_x, &self.h_z]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return invalid("non-finite coupling or field");
        }
        Ok(())
    }

    /// Number of matter sites (odd physical sites).
    pub fn n_matter(&self) -> usize {
        n_matter(self.n_sites)
    }

    /// Frame angle `β = arctan(h_z / h_x)`.
    pub fn beta(&self) -> f64 {
        (self.h_z / self.h_x).atan()
    }

    /// Sets `V_j` on all even sites.
    pub fn with_v_even(mut self, v: f64) -> Self {
        for j in (2..=self.n_sites).step_by(2) {
            self.v_long[j - 1] = v;
        }
        self
    }

    pub fn with_h_x(mut self, h_x: f64) -> Self {
        self.h_x = h_x;
        self
    }

    pub fn with_h_z(mut self, h_z: f64) -> Self {
        self.h_z = h_z;
        self
    }

    /// `λ` for the pair `(j, j+2)`. Periodic wrap-around pairs beyond the
    /// tabulated range reuse the last entry of the same parity.
    pub fn lambda_at(&self, j: usize) -> f64 {
        parity_lookup(&self.lambda_nnn, j)
    }
}

fn parity_lookup(list: &[f64], j: usize) -> f64 {
    if list.is_empty() {
        return 0.0;
    }
    if j <= list.len() {
        return list[j - 1];
    }
    let last_same = if list.len() % 2 == j % 2 { list.len() } else { list.len() - 1 };
    if last_same == 0 {
        list[0]
    } else {
        list[last_same - 1]
    }
}

pub fn n_matter(n_sites: usize) -> usize {
    n_sites.div_ceil(2)
}

/// The 10-qubit device at the localized working point
/// (`h_x = 6`, `V_even = 15`), with `h_z = -4.45` for the effective model.
pub fn device_default() -> DeviceParams {
    let l = 10;
    let v_long = (1..=l)
        .map(|j| if j % 2 == 1 { DEVICE_V_ODD } else { DEVICE_V_EVEN })
        .collect();
    DeviceParams {
        n_sites: l,
        g_nn: DEVICE_G_NN.to_vec(),
        lambda_nnn: DEVICE_LAMBDA.to_vec(),
        v_long,
        h_x: DEVICE_H_X,
        h_z: SM_H_Z,
        g_eff_s: vec![DEVICE_G_EFF; 4],
        g_eff_tau: vec![DEVICE_G_EFF; 4],
    }
}

/// Homogeneous effective-model parameters. `g` is the positive magnitude used
/// by the homogeneous form, so `g̃ = -g` on every link. `λ_s` sits on odd
/// (matter) pairs and `λ_τ` on even (gauge) pairs. Nearest-neighbour
/// couplings and longitudinal fields are zero: the set describes the
/// effective model only.
pub fn uniform_params(
    n_sites: usize,
    g: f64,
    lambda_s: f64,
    lambda_tau: f64,
    h_x: f64,
    h_z: f64,
) -> Result<DeviceParams> {
    if n_sites < 3 {
        return invalid(format!("n_sites = {n_sites}, need at least 3"));
    }
    let links = n_matter(n_sites) - 1;
    let p = DeviceParams {
        n_sites,
        g_nn: vec![0.0; n_sites - 1],
        lambda_nnn: (1..=n_sites - 2)
            .map(|j| if j % 2 == 1 { lambda_s } else { lambda_tau })
            .collect(),
        v_long: vec![0.0; n_sites],
        h_x,
        h_z,
        g_eff_s: vec![-g; links],
        g_eff_tau: vec![-g; links],
    };
    p.validate()?;
    Ok(p)
}

/// Matter site `ℓ` or gauge link `ℓ + ½`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteRole {
    Matter(usize),
    /// Stores `ℓ` of the link `ℓ + ½`.
    Gauge(usize),
}

impl SiteRole {
    pub fn of(site: usize) -> SiteRole {
        if site % 2 == 1 {
            SiteRole::Matter(site.div_ceil(2))
        } else {
            SiteRole::Gauge(site / 2)
        }
    }

    pub fn is_gauge(site: usize) -> bool {
        site % 2 == 0
    }
}

/// Physical site of matter spin `ℓ`.
pub fn matter_site(ell: usize) -> usize {
    2 * ell - 1
}

/// Physical site of the gauge spin on link `ℓ + ½`.
pub fn gauge_site(ell: usize) -> usize {
    2 * ell
}

/// Product initial state `|s⟩ ⊗ |Φ_θ⟩^{⊗N_g}`, with
/// `|Φ_θ⟩ = cos(θ/2)|1⟩ + sin(θ/2)|0⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    /// One character per matter site, `'1'` for an excitation.
    pub s_pattern: String,
    pub theta: f64,
}

impl InitialStateSpec {
    pub fn new(s_pattern: &str, theta: f64) -> Result<Self> {
        let spec = InitialStateSpec { s_pattern: s_pattern.to_string(), theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_pattern.is_empty() || !self.s_pattern.chars().all(|c| c == '0' || c == '1') {
            return invalid(format!("s_pattern {:?} is not a bit string", self.s_pattern));
        }
        if !(self.theta > -PI && self.theta <= PI) {
            return invalid(format!("theta = {} outside (-π, π]", self.theta));
        }
        Ok(())
    }

    pub fn validate_for(&self, n_sites: usize) -> Result<()> {
        self.validate()?;
        let nm = n_matter(n_sites);
        if self.s_pattern.len() != nm {
            return invalid(format!(
                "s_pattern has {} bits but L = {n_sites} has {nm} matter sites",
                self.s_pattern.len()
            ));
        }
        Ok(())
    }

    pub fn bits(&self) -> Vec<bool> {
        self.s_pattern.chars().map(|c| c == '1').collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianKind {
    Full,
    Effective,
    RotatedEffective,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Exact,
    Tebd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Device,
    Uniform,
}

/// Parameter selection as written in a config: a preset plus overrides.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default)]
    pub preset: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_even: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_tau: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<DeviceParams> {
        let mut p = match self.preset {
            Preset::Device => {
                if let Some(n) = self.n_sites {
                    if n != 10 {
                        return invalid("the device preset has exactly 10 sites; use preset = \"uniform\"");
                    }
                }
                for (name, v) in [("g", self.g), ("lambda_s", self.lambda_s), ("lambda_tau", self.lambda_tau)] {
                    if v.is_some() {
                        return invalid(format!("{name} only applies to the uniform preset"));
                    }
                }
                device_default()
            }
            Preset::Uniform => uniform_params(
                self.n_sites.unwrap_or(10),
                self.g.unwrap_or(1.8),
                self.lambda_s.unwrap_or(1.1),
                self.lambda_tau.unwrap_or(0.7),
                DEVICE_H_X,
                SM_H_Z,
            )?,
        };
        if let Some(h) = self.h_x {
            p.h_x = h;
        }
        if let Some(h) = self.h_z {
            p.h_z = h;
        }
        if let Some(v) = self.v_even {
            p = p.with_v_even(v);
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineParams {
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    #[serde(default = "default_krylov_tol")]
    pub krylov_tol: f64,
    #[serde(default = "default_trotter_dt")]
    pub trotter_dt: f64,
    #[serde(default = "default_chi_max")]
    pub chi_max: usize,
    #[serde(default = "default_svd_tol")]
    pub svd_tol: f64,
}

fn default_krylov_dim() -> usize {
    30
}
fn default_krylov_tol() -> f64 {
    1e-10
}
fn default_trotter_dt() -> f64 {
    0.002
}
fn default_chi_max() -> usize {
    256
}
fn default_svd_tol() -> f64 {
    1e-10
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            krylov_dim: default_krylov_dim(),
            krylov_tol: default_krylov_tol(),
            trotter_dt: default_trotter_dt(),
            chi_max: default_chi_max(),
            svd_tol: default_svd_tol(),
        }
    }
}

/// Optional finite-shot readout of the profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotSpec {
    pub shots: u64,
    #[serde(default)]
    pub readout_error: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub hamiltonian: HamiltonianKind,
    pub initial: InitialStateSpec,
    pub t_max: f64,
    #[serde(default = "default_dt_sample")]
    pub dt_sample: f64,
    #[serde(default = "default_window")]
    pub steady_window: [f64; 2],
    #[serde(default)]
    pub engine: EngineKind,
    #[serde(default)]
    pub engine_params: EngineParams,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<ShotSpec>,
}

fn default_dt_sample() -> f64 {
    0.005
}
fn default_window() -> [f64; 2] {
    [0.2, 1.0]
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl RunConfig {
    /// Experiment-scale defaults for the given Hamiltonian and initial state.
    pub fn new(hamiltonian: HamiltonianKind, initial: InitialStateSpec) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            hamiltonian,
            initial,
            t_max: 1.0,
            dt_sample: default_dt_sample(),
            steady_window: default_window(),
            engine: EngineKind::Exact,
            engine_params: EngineParams::default(),
            rng_seed: DEFAULT_SEED,
            params: ParamsSpec::default(),
            sampling: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return cfg_err(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return cfg_err(format!("t_max = {} must be finite and ≥ 0", self.t_max));
        }
        if !(self.dt_sample > 0.0) {
            return cfg_err(format!("dt_sample = {} must be > 0", self.dt_sample));
        }
        let [a, b] = self.steady_window;
        if !(0.0 <= a && a < b && b <= self.t_max) && self.t_max > 0.0 {
            return cfg_err(format!(
                "steady_window [{a}, {b}] violates 0 ≤ start < end ≤ t_max = {}",
                self.t_max
            ));
        }
        let ep = &self.engine_params;
        if ep.krylov_dim < 2 {
            return cfg_err("engine_params.krylov_dim must be ≥ 2".into());
        }
        if !(ep.trotter_dt > 0.0) || !(ep.krylov_tol > 0.0) || ep.svd_tol < 0.0 {
            return cfg_err("engine_params tolerances and steps must be positive".into());
        }
        if ep.chi_max < 2 {
            return cfg_err("engine_params.chi_max must be ≥ 2".into());
        }
        if let Some(s) = &self.sampling {
            if s.shots == 0 {
                return cfg_err("sampling.shots must be ≥ 1".into());
            }
        }
        let params = self.params.resolve().map_err(|e| Error::Config(e.to_string()))?;
        self.initial
            .validate_for(params.n_sites)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.hamiltonian != HamiltonianKind::Full && params.n_sites % 2 != 0 && self.params.boundary == Boundary::Periodic {
            return cfg_err("a periodic effective model needs an even number of sites".into());
        }
        Ok(())
    }

    pub fn device_params(&self) -> Result<DeviceParams> {
        self.params.resolve()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("RunConfig is always serializable")
    }

    /// Sample times `0, dt, 2dt, …` up to and including `t_max`.
    pub fn sample_times(&self) -> Vec<f64> {
        time_grid(self.t_max, self.dt_sample)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_toml_str(&text)
}

/// Uniform grid from 0 to `t_max` inclusive; the last point snaps to `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt + 1e-9).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    if let Some(last) = ts.last_mut() {
        if (t_max - *last).abs() < 1e-9 * dt.max(1.0) {
            *last = t_max;
        } else if *last < t_max {
            ts.push(t_max);
        }
    }
    ts
}

/// `n` points evenly covering `(lo, hi]`.
pub fn half_open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    // Counted back from `hi` so the closed end is hit exactly.
    let step = (hi - lo) / n as f64;
    (0..n).rev().map(|k| hi - k as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
hamiltonian = "full"
t_max = 1.0
steady_window = [0.2, 1.0]

[initial]
s_pattern = "00100"
theta = -1.0471975511965976
"#;

    #[test]
    fn device_table() {
        let d = device_default();
        d.validate().unwrap();
        assert_eq!(d.g_nn[0], 12.05);
        assert!((1..=10).step_by(2).all(|j| d.v_long[j - 1] == -80.0));
        assert!(d.g_eff_s.iter().chain(&d.g_eff_tau).all(|&g| g == -1.8));
        assert_eq!(d, device_default());
    }

    #[test]
    fn uniform_rejects_short_chains() {
        assert!(uniform_params(2, 1.8, 1.1, 0.7, 6.0, -4.45).is_err());
        let p = uniform_params(80, 1.8, 1.1, 0.7, 6.0, -4.45).unwrap();
        assert_eq!(p.lambda_nnn[0], 1.1);
        assert_eq!(p.lambda_nnn[1], 0.7);
        assert!((p.beta() + 0.638).abs() < 1e-3);
    }

    #[test]
    fn site_roles() {
        assert_eq!(SiteRole::of(1), SiteRole::Matter(1));
        assert_eq!(SiteRole::of(2), SiteRole::Gauge(1));
        assert_eq!(SiteRole::of(9), SiteRole::Matter(5));
        assert_eq!(matter_site(3), 5);
        assert_eq!(gauge_site(3), 6);
    }

    #[test]
    fn periodic_lambda_lookup_keeps_parity() {
        let p = uniform_params(6, 1.8, 1.1, 0.7, 6.0, -4.45).unwrap();
        assert_eq!(p.lambda_at(5), 1.1);
        assert_eq!(p.lambda_at(6), 0.7);
    }

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.t_max, 1.0);
        assert_eq!(cfg.steady_window, [0.2, 1.0]);
        assert_eq!(cfg.rng_seed, DEFAULT_SEED);
        assert_eq!(cfg.engine_params, EngineParams::default());
    }

    #[test]
    fn reversed_window_rejected() {
        let text = MINIMAL.replace("[0.2, 1.0]", "[0.5, 0.2]");
        match RunConfig::from_toml_str(&text) {
            Err(Error::Config(m)) => assert!(m.contains("steady_window")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{MINIMAL}\nbogus = 3\n");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::from_toml_str(MINIMAL).unwrap();
        cfg.params.h_x = Some(2.0);
        cfg.sampling = Some(ShotSpec { shots: 8000, readout_error: true });
        let again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn pattern_length_checked() {
        let text = MINIMAL.replace("00100", "0010");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn grids() {
        let ts = time_grid(1.0, 0.005);
        assert_eq!(ts.len(), 201);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert_eq!(time_grid(0.0, 0.005), vec![0.0]);
        let th = half_open_grid(-PI, PI, 25);
        assert_eq!(th.len(), 25);
        assert_eq!(th[24], PI);
        assert!(th[0] > -PI);
    }
}
