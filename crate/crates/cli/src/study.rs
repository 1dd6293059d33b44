//! Nested-refinement convergence studies: all levels share one Brownian
//! realization through bridge refinement, so per-level errors are directly
//! comparable pathwise.

use crate::config::{ConfigError, Mode, RunConfig};
use crate::experiments::{self, NoiseParams};
use crate::runner::RunError;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct StudyLevel {
    pub level: u32,
    pub dt: f64,
    pub metric: f64,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub metric_name: String,
    pub levels: Vec<StudyLevel>,
    /// `metric[i] / metric[i+1]` per refinement.
    pub ratios: Vec<f64>,
    pub fitted_order: f64,
}

impl StudyReport {
    fn from_points(metric_name: &str, points: Vec<(f64, f64)>) -> Self {
        let levels = points
            .iter()
            .enumerate()
            .map(|(i, (dt, m))| StudyLevel { level: i as u32, dt: *dt, metric: *m })
            .collect::<Vec<_>>();
        let ratios = points.windows(2).map(|w| w[0].1 / w[1].1).collect();
        let fitted_order = experiments::fitted_order(&points);
        StudyReport { metric_name: metric_name.to_string(), levels, ratios, fitted_order }
    }

    pub fn render(&self) -> String {
        let mut out = format!("convergence study: {}\n", self.metric_name);
        for l in &self.levels {
            let _ = writeln!(out, "  level {}: dt = {:.3e}  metric = {:.6e}", l.level, l.dt, l.metric);
        }
        for (i, r) in self.ratios.iter().enumerate() {
            let _ = writeln!(out, "  ratio level {} -> {}: {:.3} (log2 = {:.3})", i, i + 1, r, r.log2());
        }
        let _ = writeln!(out, "  fitted order: {:.3}", self.fitted_order);
        out
    }
}

fn noise_of(config: &RunConfig) -> NoiseParams {
    NoiseParams {
        k: config.noise.k,
        gamma: config.noise.gamma,
        c: config.noise.c,
        kmax: config.noise.kmax,
    }
}

/// Run a refinement study for the configured mode. Each level halves `dt`;
/// the field experiments also double the grid per level.
pub fn convergence_study(
    config: &RunConfig,
    levels: u32,
    out: Option<&Path>,
) -> Result<StudyReport, RunError> {
    config.validate()?;
    if levels < 2 {
        return Err(ConfigError::Invalid("levels: must be >= 2".to_string()).into());
    }
    let base_steps = config.n_steps();
    let dt_at = |l: u32| config.t_end / (base_steps << l) as f64;
    let report = match config.mode {
        Mode::SdeConvergence => {
            let points = match config.sde.kind.as_str() {
                "linear-ode" => experiments::ode_errors(
                    base_steps,
                    levels as usize,
                    config.sde.lambda,
                    config.sde.x0,
                )?,
                _ => experiments::gbm_strong_errors(
                    base_steps,
                    levels as usize,
                    config.sde.paths as u64,
                    config.seed,
                    config.sde.x0,
                )?,
            };
            StudyReport::from_points("sde strong error", points)
        }
        Mode::EulerVorticity => {
            let noise = noise_of(config);
            let mut points = Vec::new();
            for l in 0..levels {
                let drift = experiments::enstrophy_drift(
                    config.seed,
                    l,
                    config.nx,
                    base_steps,
                    config.t_end,
                    &noise,
                )?;
                points.push((dt_at(l), drift));
            }
            StudyReport::from_points("relative enstrophy drift", points)
        }
        Mode::AdvectionTest => {
            let noise = noise_of(config);
            let mut points = Vec::new();
            for l in 0..levels {
                let r = experiments::kiw_residual_at_level(
                    config.seed,
                    l,
                    config.nx,
                    base_steps,
                    config.t_end,
                    config.advection.particles,
                    &noise,
                )?;
                points.push((dt_at(l), r));
            }
            StudyReport::from_points("KIW residual r(T)", points)
        }
        Mode::Rsw => {
            let noise = noise_of(config);
            let mut points = Vec::new();
            for l in 0..levels {
                let (_, pv) = experiments::rsw_mass_and_pv_residual(
                    config.seed,
                    l,
                    config.nx,
                    base_steps,
                    config.t_end,
                    config.advection.particles,
                    &noise,
                )?;
                points.push((dt_at(l), pv));
            }
            StudyReport::from_points("PV-along-particles residual", points)
        }
        other => {
            return Err(ConfigError::Invalid(format!(
                "mode: study is not defined for {:?}",
                other.name()
            ))
            .into())
        }
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut csv = String::from("level,dt,metric\n");
        for l in &report.levels {
            let _ = writeln!(csv, "{},{},{}", l.level, l.dt, l.metric);
        }
        std::fs::write(dir.join("study.csv"), csv)?;
        std::fs::write(dir.join("study.txt"), report.render())?;
    }
    Ok(report)
}
