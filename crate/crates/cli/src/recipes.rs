use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::path::{Path, PathBuf};

use gaugechain::experiments::{
    alpha_tables, eigen_scatter, eigen_scatter_table, evolution_tables, evolve, ground_state_gauss,
    ground_state_table, sweep_alpha, sweep_theta, theta_table,
};
use gaugechain::model::{
    half_open_grid, load_config, n_matter, HamiltonianKind, InitialStateSpec, ParamsSpec, Preset, RunConfig,
    SM_H_Z,
};
use gaugechain::mps::DmrgParams;
use gaugechain::table::Table;
use gaugechain::{Error, Result};

use crate::{Cli, Recipe};

/// A single excitation on the central matter site.
pub fn centered_pattern(n_sites: usize) -> String {
    let nm = n_matter(n_sites);
    (0..nm).map(|k| if k == nm / 2 { '1' } else { '0' }).collect()
}

/// Base config: `--config` if given, else `default`; then the global flags.
fn base(cli: &Cli, default: RunConfig) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => default,
    };
    if let Some(s) = cli.seed {
        cfg.rng_seed = s;
    }
    if let Some(e) = cli.engine {
        cfg.engine = e.into();
    }
    Ok(cfg)
}

fn device_quench(theta: f64) -> RunConfig {
    let spec = InitialStateSpec::new(&centered_pattern(10), theta).expect("valid pattern");
    RunConfig::new(HamiltonianKind::Full, spec)
}

fn uniform(n_sites: usize, h_z: f64) -> ParamsSpec {
    ParamsSpec { preset: Preset::Uniform, n_sites: Some(n_sites), h_z: Some(h_z), ..ParamsSpec::default() }
}

fn write_all(cli: &Cli, dir: &Path, tables: &[Table]) -> Result<()> {
    for t in tables {
        let p = t.write(dir, cli.force)?;
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn checked(cfg: RunConfig) -> Result<RunConfig> {
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let root = |name: &str| -> PathBuf { cli.out.join(name) };
    match &cli.recipe {
        Recipe::Fig2 => {
            let panels = [("a", 2.0, 0.0, -FRAC_PI_3), ("b", 6.0, 15.0, -FRAC_PI_3), ("c", 6.0, 15.0, -FRAC_PI_2), ("d", 6.0, 15.0, PI)];
            let b = base(cli, device_quench(-FRAC_PI_3))?;
            for (name, h_x, v_even, theta) in panels {
                let mut cfg = b.clone();
                cfg.params.h_x = Some(h_x);
                cfg.params.v_even = Some(v_even);
                cfg.initial.theta = theta;
                let cfg = checked(cfg)?;
                let ev = evolve(&cfg)?;
                let (m, _) = ev.steady_imbalance(cfg.steady_window)?;
                log::info!("fig2 panel {name}: steady imbalance {m:.4}");
                write_all(cli, &root("fig2").join(format!("panel_{name}")), &evolution_tables(&cfg, &ev)?)?;
            }
        }
        Recipe::Fig3 { points } => {
            let cfg = checked(base(cli, device_quench(-FRAC_PI_3))?)?;
            let thetas = half_open_grid(-PI, PI, *points);
            let s = sweep_theta(&cfg, &thetas, cli.workers)?;
            log::info!("fig3: Gaussian peak at θ = {:.4} (degenerate: {})", s.fit.mu, s.fit.degenerate);
            write_all(cli, &root("fig3"), &[theta_table(&cfg, &s)?])?;
        }
        Recipe::Fig4 { points, ell } => {
            let cfg = checked(base(cli, device_quench(-FRAC_PI_3))?)?;
            let alphas = half_open_grid(-FRAC_PI_2, FRAC_PI_2, *points);
            let s = sweep_alpha(&cfg, *ell, &alphas, None)?;
            log::info!("fig4: extremum at α* = {:.4}", s.curve.alpha_star);
            write_all(cli, &root("fig4"), &alpha_tables(&cfg, &s)?)?;
        }
        Recipe::Figs4 { sites, chi } => {
            let mut default = RunConfig::new(
                HamiltonianKind::Effective,
                InitialStateSpec::new(&centered_pattern(*sites), 0.0)?,
            );
            default.params = uniform(*sites, SM_H_Z);
            let b = base(cli, default)?;
            let dmrg = DmrgParams { chi_max: *chi, seed: b.rng_seed, ..DmrgParams::default() };
            let mut unconverged = Vec::new();
            for (name, h_z) in [("hz_0", 0.0), ("hz_-4.45", SM_H_Z), ("hz_-6", -6.0)] {
                let mut cfg = b.clone();
                cfg.params.h_z = Some(h_z);
                let cfg = checked(cfg)?;
                let g = ground_state_gauss(&cfg, &dmrg)?;
                log::info!("figs4 h_z = {h_z}: energy {:.8}, max Gauss residual {:.4}", g.energy, g.max_residual);
                if !g.converged {
                    unconverged.push(name);
                }
                let mut t = ground_state_table(&cfg, &dmrg, &g)?;
                t.name = format!("gauss_ground_state_{name}");
                write_all(cli, &root("figs4"), &[t])?;
            }
            if !unconverged.is_empty() {
                return Err(Error::NotConverged(format!("DMRG for {}", unconverged.join(", "))));
            }
        }
        Recipe::Figs4d { sites } => {
            let mut default = RunConfig::new(
                HamiltonianKind::Effective,
                InitialStateSpec::new(&centered_pattern(*sites), 0.0)?,
            );
            default.params = uniform(*sites, SM_H_Z);
            let cfg = checked(base(cli, default)?)?;
            let s = eigen_scatter(&cfg)?;
            let (lo, hi) = s.tail_means(0.1);
            log::info!("figs4d: mean Gauss residual {lo:.4} (lowest 10%) vs {hi:.4} (highest 10%)");
            write_all(cli, &root("figs4d"), &[eigen_scatter_table(&cfg, &s)?])?;
        }
        Recipe::Figs5 { sites, points } => {
            let mut default = RunConfig::new(
                HamiltonianKind::Effective,
                InitialStateSpec::new(&centered_pattern(*sites), -FRAC_PI_3)?,
            );
            default.params = uniform(*sites, SM_H_Z);
            default.t_max = 8.0;
            default.dt_sample = 0.05;
            default.steady_window = [4.0, 8.0];
            default.engine = gaugechain::model::EngineKind::Tebd;
            let cfg = checked(base(cli, default)?)?;
            let thetas = half_open_grid(-PI, PI, *points);
            let s = sweep_theta(&cfg, &thetas, cli.workers)?;
            log::info!("figs5: Gaussian peak at θ = {:.4}", s.fit.mu);
            write_all(cli, &root("figs5"), &[theta_table(&cfg, &s)?])?;
            let ell = (n_matter(*sites) + 1) / 2;
            let beta = cfg.device_params()?.beta();
            // The series follows the generator at α = β rather than at the fitted extremum.
            let g = sweep_alpha(&cfg, ell, &half_open_grid(-FRAC_PI_2, FRAC_PI_2, 25), Some(beta))?;
            write_all(cli, &root("figs5"), &alpha_tables(&cfg, &g)?)?;
        }
        Recipe::Custom => {
            let Some(path) = &cli.config else {
                return Err(Error::Config("custom needs --config".into()));
            };
            let cfg = checked(base(cli, load_config(path)?)?)?;
            let ev = evolve(&cfg)?;
            write_all(cli, &root("custom"), &evolution_tables(&cfg, &ev)?)?;
        }
    }
    Ok(())
}
