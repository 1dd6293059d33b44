//! Execute a configured run: single member or ensemble, with manifest,
//! per-step diagnostics CSV and optional SFLD snapshots. Identical
//! `(config, seed)` produce bit-identical diagnostics CSVs.

use crate::config::{ConfigError, Mode, RunConfig};
use crate::experiments;
use rayon::prelude::*;
use saltlab::advection::{advect_scalar, kiw_residual, particle_trajectory, ParticleSet};
use saltlab::fields::{
    interpolate, random_band_limited, random_divergence_free, write_sfld, Grid2D, ScalarField,
    VectorField2D,
};
use saltlab::noise_basis::NoiseBasis;
use saltlab::paths::{sample_brownian, sample_ou, DrivingPath, TimeGrid};
use saltlab::salt_euler::{
    cfl_exceeded, diagnostics_velocity, diagnostics_vorticity, step_velocity, step_vorticity,
    taylor_green_velocity, taylor_green_vorticity, velocity_from_vorticity, VelocityState,
    VorticityState,
};
use saltlab::salt_rsw::{rsw_diagnostics, step_rsw, RswParams, RswState};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver abort: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<saltlab::Error> for RunError {
    fn from(e: saltlab::Error) -> Self {
        RunError::Solver(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberOutcome {
    pub seed: u64,
    pub dir: String,
    /// "ok" or "aborted at step N: reason"
    pub status: String,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub members: Vec<MemberOutcome>,
    /// Human-readable notes (fitted slopes, success fractions).
    pub notes: Vec<String>,
}

impl RunSummary {
    pub fn all_ok(&self) -> bool {
        self.members.iter().all(|m| m.status == "ok")
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    mode: &'a str,
    wall_time_s: f64,
    notes: &'a [String],
    members: &'a [MemberOutcome],
    config: &'a RunConfig,
}

/// Format a float with shortest round-trip representation (deterministic;
/// negative zero normalized).
fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    fn new(columns: &[&str]) -> Self {
        CsvWriter { buf: format!("{}\n", columns.join(",")) }
    }

    fn row(&mut self, step: u64, time: f64, values: &[f64]) {
        let _ = write!(self.buf, "{step},{}", fmt(time));
        for v in values {
            let _ = write!(self.buf, ",{}", fmt(*v));
        }
        self.buf.push('\n');
    }

    fn finish(self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.buf)
    }
}

/// Execute a run; `out_override` replaces the config's output directory.
pub fn run(config: &RunConfig, out_override: Option<&Path>) -> Result<RunSummary, RunError> {
    config.validate()?;
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("saltlab-out"));
    std::fs::create_dir_all(&out_dir)?;
    let started = Instant::now();

    let mut notes = Vec::new();
    let members: Vec<MemberOutcome> = if config.members == 1 {
        let (status, mut member_notes) = run_member(config, config.seed, &out_dir)?;
        notes.append(&mut member_notes);
        vec![MemberOutcome { seed: config.seed, dir: ".".into(), status }]
    } else {
        let outcomes: Vec<Result<MemberOutcome, RunError>> = (0..config.members)
            .into_par_iter()
            .map(|i| {
                let seed = config.seed + i as u64;
                let dir_name = format!("member-{i:03}");
                let dir = out_dir.join(&dir_name);
                std::fs::create_dir_all(&dir)?;
                let (status, _) = run_member(config, seed, &dir)?;
                Ok(MemberOutcome { seed, dir: dir_name, status })
            })
            .collect();
        let mut members = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            members.push(o?);
        }
        members
    };

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        mode: config.mode.name(),
        wall_time_s: started.elapsed().as_secs_f64(),
        notes: &notes,
        members: &members,
        config,
    };
    std::fs::write(
        out_dir.join("manifest.toml"),
        toml::to_string(&manifest).expect("manifest serializes"),
    )?;
    Ok(RunSummary { out_dir, members, notes })
}

fn build_path(config: &RunConfig, seed: u64) -> Result<DrivingPath, RunError> {
    let grid = TimeGrid::new(0.0, config.t_end, config.n_steps())?;
    let k = config.n_channels();
    Ok(match config.path.kind.as_str() {
        "ou" => sample_ou(grid, k, config.path.theta, config.path.sigma, seed)?,
        _ => sample_brownian(grid, k, seed),
    })
}

fn initial_vorticity(config: &RunConfig, grid: Grid2D, seed: u64) -> ScalarField {
    match config.ic.kind.as_str() {
        "random" => {
            random_band_limited(grid, config.ic.kmax, config.ic.amplitude, seed.wrapping_add(101))
        }
        _ => taylor_green_vorticity(grid),
    }
}

fn warn_cfl(config: &RunConfig, umax: f64, basis: &NoiseBasis, grid: Grid2D) {
    if cfl_exceeded(umax, basis, config.dt, grid.hx().min(grid.hy())) {
        eprintln!(
            "warning: dt = {} exceeds the advisory CFL bound for max |u| = {umax:.3}",
            config.dt
        );
    }
}

type MemberResult = Result<(String, Vec<String>), RunError>;

fn run_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    match config.mode {
        Mode::EulerVorticity => euler_vorticity_member(config, seed, dir),
        Mode::EulerVelocity => euler_velocity_member(config, seed, dir),
        Mode::Rsw => rsw_member(config, seed, dir),
        Mode::AdvectionTest => advection_member(config, seed, dir),
        Mode::SdeConvergence => sde_member(config, seed, dir),
        Mode::LemmaCheck => lemma_member(config, seed, dir),
    }
}

const EULER_COLUMNS: [&str; 8] =
    ["step", "time", "energy", "enstrophy", "casimir4", "div_rms", "p0_norm", "pk_norm_total"];

fn euler_row(csv: &mut CsvWriter, d: &saltlab::salt_euler::EulerDiagnostics) {
    csv.row(
        d.step,
        d.time,
        &[d.energy, d.enstrophy, d.casimir4, d.div_rms, d.p0_norm, d.pk_norm_total],
    );
}

fn abort_status(step: u64, err: &saltlab::Error) -> String {
    format!("aborted at step {step}: {err}")
}

fn euler_vorticity_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    let grid = config.grid()?;
    let basis = config.build_basis(grid)?;
    let path = build_path(config, seed)?;
    let mut state = VorticityState::new(initial_vorticity(config, grid, seed));
    warn_cfl(config, velocity_from_vorticity(&state.omega).linf(), &basis, grid);
    let mut csv = CsvWriter::new(&EULER_COLUMNS);
    euler_row(&mut csv, &diagnostics_vorticity(&state, &basis));
    let mut status = "ok".to_string();
    for n in 0..path.grid.n_steps {
        match step_vorticity(&state, &basis, &path.increments(n)) {
            Ok(next) => state = next,
            Err(e) => {
                status = abort_status(state.step, &e);
                break;
            }
        }
        euler_row(&mut csv, &diagnostics_vorticity(&state, &basis));
        maybe_snapshot(config, dir, state.step, state.time, &[&state.omega])?;
    }
    csv.finish(&dir.join("diagnostics.csv"))?;
    Ok((status, Vec::new()))
}

fn euler_velocity_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    let grid = config.grid()?;
    let basis = config.build_basis(grid)?;
    let path = build_path(config, seed)?;
    let u0 = match config.ic.kind.as_str() {
        "random" => velocity_from_vorticity(&initial_vorticity(config, grid, seed)),
        _ => taylor_green_velocity(grid),
    };
    warn_cfl(config, u0.linf(), &basis, grid);
    let mut state = VelocityState::new(u0);
    let mut csv = CsvWriter::new(&EULER_COLUMNS);
    euler_row(&mut csv, &diagnostics_velocity(&state));
    let mut status = "ok".to_string();
    for n in 0..path.grid.n_steps {
        match step_velocity(&state, &basis, &path.increments(n)) {
            Ok((next, _)) => state = next,
            Err(e) => {
                status = abort_status(state.step, &e);
                break;
            }
        }
        euler_row(&mut csv, &diagnostics_velocity(&state));
        maybe_snapshot(config, dir, state.step, state.time, &[&state.u.x, &state.u.y])?;
    }
    csv.finish(&dir.join("diagnostics.csv"))?;
    Ok((status, Vec::new()))
}

fn rsw_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    let grid = config.grid()?;
    let basis = config.build_basis(grid)?;
    let path = build_path(config, seed)?;
    let f = ScalarField::from_fn(grid, |_, y| config.rsw.f0 + config.rsw.f_wave * y.cos());
    let b = ScalarField::from_fn(grid, |x, y| config.rsw.b_amp * x.cos() * y.cos());
    let params = RswParams::new(config.rsw.epsilon, config.rsw.froude, f, b)
        .map_err(|e| ConfigError::Invalid(format!("rsw: {e}")))?;
    let mut state = match config.ic.kind.as_str() {
        "random" => {
            let u = random_divergence_free(
                grid,
                config.ic.kmax,
                0.2 * config.ic.amplitude,
                seed.wrapping_add(102),
            );
            let mut eta = random_band_limited(
                grid,
                config.ic.kmax,
                0.05 * config.ic.amplitude,
                seed.wrapping_add(103),
            );
            eta.add_constant(config.rsw.depth);
            RswState::new(u, eta)?
        }
        _ => RswState::rest(grid, config.rsw.depth),
    };
    warn_cfl(config, state.u.linf(), &basis, grid);
    let mut csv =
        CsvWriter::new(&["step", "time", "mass", "energy", "pv_min", "pv_max", "eta_min"]);
    let rsw_row = |csv: &mut CsvWriter, d: &saltlab::salt_rsw::RswDiagnostics| {
        csv.row(d.step, d.time, &[d.mass, d.energy, d.pv_min, d.pv_max, d.eta_min]);
    };
    rsw_row(&mut csv, &rsw_diagnostics(&state, &params));
    let mut status = "ok".to_string();
    for n in 0..path.grid.n_steps {
        match step_rsw(&state, &params, &basis, &path.increments(n)) {
            Ok(next) => state = next,
            Err(e) => {
                status = abort_status(state.step, &e);
                break;
            }
        }
        rsw_row(&mut csv, &rsw_diagnostics(&state, &params));
        maybe_snapshot(
            config,
            dir,
            state.step,
            state.time,
            &[&state.u.x, &state.u.y, &state.eta],
        )?;
    }
    csv.finish(&dir.join("diagnostics.csv"))?;
    Ok((status, Vec::new()))
}

fn advection_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    let grid = config.grid()?;
    let basis = config.build_basis(grid)?;
    let path = build_path(config, seed)?;
    let n1 = path.grid.n_steps;
    let u = random_divergence_free(grid, config.ic.kmax, 0.3 * config.ic.amplitude, seed + 5);
    let a0 = random_band_limited(grid, config.ic.kmax, config.ic.amplitude, seed + 6);
    let series = vec![u.clone(); n1 + 1];
    let fields = advect_scalar(&a0, &series, &basis, &path, 0, n1)?;
    let particles = ParticleSet::scatter(config.advection.particles, seed + 7);
    let trajectory = particle_trajectory(&particles, &series, &basis, &path, 0, n1)?;
    let residuals = kiw_residual(&fields, &trajectory)?;

    let mut particle_csv =
        CsvWriter::new(&["step", "time", "particle_id", "x", "y", "a_value", "residual"]);
    let reference = interpolate(&fields[0], trajectory[0].initial())?;
    for (n, (field, cloud)) in fields.iter().zip(&trajectory).enumerate() {
        let time = path.grid.node(n);
        let values = interpolate(field, cloud.positions())?;
        for (pid, (pos, value)) in cloud.positions().iter().zip(&values).enumerate() {
            let mut row = String::new();
            let _ = write!(
                row,
                "{n},{},{pid},{},{},{},{}",
                fmt(time),
                fmt(pos[0]),
                fmt(pos[1]),
                fmt(*value),
                fmt((value - reference[pid]).abs())
            );
            particle_csv.buf.push_str(&row);
            particle_csv.buf.push('\n');
        }
    }
    std::fs::write(dir.join("particles.csv"), particle_csv.buf)?;

    let mut csv = CsvWriter::new(&["step", "time", "residual_max"]);
    for (n, r) in residuals.iter().enumerate() {
        csv.row(n as u64, path.grid.node(n), &[*r]);
    }
    csv.finish(&dir.join("diagnostics.csv"))?;
    maybe_snapshot(config, dir, n1 as u64, config.t_end, &[fields.last().unwrap()])?;
    Ok(("ok".to_string(), Vec::new()))
}

fn sde_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    let base_steps = config.n_steps();
    let points = match config.sde.kind.as_str() {
        "linear-ode" => {
            experiments::ode_errors(base_steps, config.sde.levels, config.sde.lambda, config.sde.x0)?
        }
        _ => experiments::gbm_strong_errors(
            base_steps,
            config.sde.levels,
            config.sde.paths as u64,
            seed,
            config.sde.x0,
        )?,
    };
    let mut csv = CsvWriter::new(&["dt", "strong_error"]);
    for (dt, err) in &points {
        let _ = write!(csv.buf, "{},{}\n", fmt(*dt), fmt(*err));
    }
    std::fs::write(dir.join("convergence.csv"), csv.buf)?;
    let slope = experiments::fitted_order(&points);
    Ok(("ok".to_string(), vec![format!("fitted strong order: {slope:.3}")]))
}

fn lemma_member(config: &RunConfig, seed: u64, dir: &Path) -> MemberResult {
    let n_steps = config.n_steps();
    let (a, b) = (config.lemma.a, config.lemma.b);
    if a <= 0.0 || b >= config.t_end {
        return Err(ConfigError::Invalid(format!(
            "lemma.a/lemma.b: [{a}, {b}] must lie strictly inside (0, {})",
            config.t_end
        ))
        .into());
    }
    let _ = seed;
    let sequences = experiments::lemma_error_sequences(
        config.lemma.seeds as u64,
        n_steps,
        a,
        b,
        config.lemma.n_smooth,
    )?;
    let mut csv = CsvWriter::new(&["seed", "m", "error"]);
    for (s, errors) in sequences.iter().enumerate() {
        for (m, e) in errors.iter().enumerate() {
            let _ = write!(csv.buf, "{s},{},{}\n", m + 1, fmt(*e));
        }
    }
    std::fs::write(dir.join("lemma_errors.csv"), csv.buf)?;
    let success = experiments::lemma_success_count(&sequences);
    Ok((
        "ok".to_string(),
        vec![format!(
            "lemma ramp errors: {}/{} seeds satisfied e_final < e_1/10",
            success,
            sequences.len()
        )],
    ))
}

fn maybe_snapshot(
    config: &RunConfig,
    dir: &Path,
    step: u64,
    time: f64,
    fields: &[&ScalarField],
) -> Result<(), RunError> {
    if config.snapshot_every > 0 && step % config.snapshot_every as u64 == 0 {
        write_sfld(&dir.join(format!("snapshot-{step:06}.sfld")), time, fields)?;
    }
    Ok(())
}

/// Convenience wrapper for tests: build a velocity field from the standard
/// vorticity initial condition.
pub fn standard_velocity(grid: Grid2D, seed: u64) -> VectorField2D {
    experiments::standard_velocity_ic(grid, seed)
}
