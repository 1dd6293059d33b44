//! Reusable experiment drivers behind the CLI modes, the `study`
//! subcommand and the acceptance suite. Each driver fixes a "standard"
//! configuration of the random ingredients so that refinement studies and
//! reruns are reproducible from a single seed.

use saltlab::advection::{
    advance_particles_steady, advect_scalar_steady, kiw_final_residual, particle_step,
    InterpVelocity, ParticleSet,
};
use saltlab::error::Result;
use saltlab::fields::{
    curl2d, interpolate, random_band_limited, random_divergence_free, shift, Grid2D,
    ScalarField, VectorField2D,
};
use saltlab::noise_basis::{make_fourier_basis, NoiseBasis};
use saltlab::paths::{refine, sample_brownian, DrivingPath, TimeGrid};
use saltlab::salt_euler::{
    diagnostics_vorticity, step_velocity_with, step_vorticity, taylor_green_vorticity,
    velocity_from_vorticity, VelocityOptions, VelocityState, VorticityState,
};
use saltlab::salt_rsw::{potential_vorticity, rsw_diagnostics, step_rsw, RswParams, RswState};
use saltlab::stratonovich::{heun_integrate, SdeSystem};

/// Fourier-basis parameters of the leveled experiments.
#[derive(Debug, Clone, Copy)]
pub struct NoiseParams {
    pub k: usize,
    pub gamma: f64,
    pub c: f64,
    pub kmax: i64,
}

impl NoiseParams {
    /// The standard small basis used by the refinement experiments.
    pub fn standard() -> Self {
        NoiseParams { k: 4, gamma: 2.0, c: 0.1, kmax: 2 }
    }

    pub fn build(&self, grid: Grid2D) -> Result<NoiseBasis> {
        if self.k == 0 {
            return Ok(NoiseBasis::empty(grid));
        }
        make_fourier_basis(grid, self.k, self.gamma, self.c, self.kmax)
    }
}

/// Integrate the vorticity form along path nodes `n0..n1`.
pub fn vorticity_run(
    omega0: ScalarField,
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<VorticityState> {
    let mut state = VorticityState::new(omega0);
    for n in n0..n1 {
        state = step_vorticity(&state, basis, &path.increments(n))?;
    }
    Ok(state)
}

/// Integrate the velocity form, collecting the per-channel post-projection
/// divergence of every step.
pub fn velocity_run(
    u0: VectorField2D,
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
    opts: VelocityOptions,
) -> Result<(VelocityState, Vec<Vec<f64>>)> {
    let mut state = VelocityState::new(u0);
    let mut divs = Vec::with_capacity(n1 - n0);
    for n in n0..n1 {
        let (next, report) = step_velocity_with(&state, basis, &path.increments(n), opts)?;
        state = next;
        divs.push(report.channel_div_rms);
    }
    Ok((state, divs))
}

/// Standard random vorticity field for the Euler experiments.
pub fn standard_vorticity_ic(grid: Grid2D, seed: u64) -> ScalarField {
    random_band_limited(grid, 4, 1.0, seed.wrapping_mul(2654435761).wrapping_add(17))
}

/// Relative enstrophy drift of a vorticity-form run at refinement `level`
/// (level 0: 64^2 and the base step; each level halves `dt`, doubles the
/// grid and bridge-refines the same driving realization).
pub fn enstrophy_drift(
    seed: u64,
    level: u32,
    base_n: usize,
    base_steps: usize,
    t_end: f64,
    noise: &NoiseParams,
) -> Result<f64> {
    let factor = 1usize << level;
    let grid = Grid2D::new(base_n * factor, base_n * factor)?;
    let basis = noise.build(grid)?;
    let mut path = sample_brownian(TimeGrid::new(0.0, t_end, base_steps)?, noise.k, seed);
    for l in 0..level {
        path = refine(&path, 2, seed.wrapping_add(1000 + l as u64))?;
    }
    let omega0 = standard_vorticity_ic(grid, seed);
    let start = diagnostics_vorticity(&VorticityState::new(omega0.clone()), &basis).enstrophy;
    let state = vorticity_run(omega0, &basis, &path, 0, path.grid.n_steps)?;
    let end = diagnostics_vorticity(&state, &basis).enstrophy;
    Ok((end - start).abs() / start)
}

/// Max-norm error of the stochastic solution against the shifted
/// deterministic solution for a single uniform noise mode.
pub fn translation_equivariance_error(
    seed: u64,
    n: usize,
    n_steps: usize,
    t_end: f64,
    c: [f64; 2],
) -> Result<f64> {
    let grid = Grid2D::new(n, n)?;
    let basis = NoiseBasis::uniform(grid, c[0], c[1]);
    let empty = NoiseBasis::empty(grid);
    let mut omega0 = taylor_green_vorticity(grid);
    omega0.add_scaled(0.3, &random_band_limited(grid, 3, 0.5, seed.wrapping_add(71)));
    let path = sample_brownian(TimeGrid::new(0.0, t_end, n_steps)?, 1, seed);
    let mut stoch = VorticityState::new(omega0.clone());
    let mut det = VorticityState::new(omega0);
    for step in 0..n_steps {
        let ds = path.increments(step);
        stoch = step_vorticity(&stoch, &basis, &ds)?;
        det = step_vorticity(&det, &empty, &[ds[0]])?;
    }
    let w_t = path.component(1)[n_steps];
    let shifted = shift(&det.omega, [c[0] * w_t, c[1] * w_t]);
    Ok(stoch.omega.sub(&shifted).linf())
}

/// `dX = X o dW` (exact solution `X_0 exp(W_T)`).
struct StratGbm;

impl SdeSystem for StratGbm {
    fn dim(&self) -> usize {
        1
    }
    fn n_channels(&self) -> usize {
        1
    }
    fn drift(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn diffusion(&self, _j: usize, x: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }
}

/// `dX = lambda X dt`.
pub struct LinearOde {
    pub lambda: f64,
}

impl SdeSystem for LinearOde {
    fn dim(&self) -> usize {
        1
    }
    fn n_channels(&self) -> usize {
        0
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.lambda * x[0];
    }
    fn diffusion(&self, _j: usize, _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
}

/// Strong error of Heun for Stratonovich GBM on nested bridge-refined
/// paths: returns `(dt, rms error)` per level, coarsest first.
pub fn gbm_strong_errors(
    base_steps: usize,
    levels: usize,
    n_paths: u64,
    seed: u64,
    x0: f64,
) -> Result<Vec<(f64, f64)>> {
    let sys = StratGbm;
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let mut total = 0.0;
        for p in 0..n_paths {
            let mut path =
                sample_brownian(TimeGrid::new(0.0, 1.0, base_steps)?, 1, seed.wrapping_add(p));
            for l in 0..level {
                path = refine(&path, 2, seed.wrapping_add(31 + (p << 8) + l as u64))?;
            }
            let states = heun_integrate(&sys, &[x0], &path, 0, path.grid.n_steps)?;
            let exact = x0 * path.component(1)[path.grid.n_steps].exp();
            let err = states.last().unwrap()[0] - exact;
            total += err * err;
        }
        let steps = base_steps << level;
        out.push((1.0 / steps as f64, (total / n_paths as f64).sqrt()));
    }
    Ok(out)
}

/// Strong error of Heun for `dX = lambda X dt` against the exact
/// exponential (per-level `(dt, error)`).
pub fn ode_errors(
    base_steps: usize,
    levels: usize,
    lambda: f64,
    x0: f64,
) -> Result<Vec<(f64, f64)>> {
    let sys = LinearOde { lambda };
    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let steps = base_steps << level;
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, steps)?, 0, 0);
        let states = heun_integrate(&sys, &[x0], &path, 0, steps)?;
        let exact = x0 * lambda.exp();
        out.push((1.0 / steps as f64, (states.last().unwrap()[0] - exact).abs()));
    }
    Ok(out)
}

/// Least-squares slope of `log2(err)` against `log2(dt)`.
pub fn fitted_order(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(dt, e)| (dt.log2(), e.log2()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Fundamental-lemma harness over an ensemble: per-seed error sequences
/// for `F = W` against its own component.
pub fn lemma_error_sequences(
    seeds: u64,
    n_steps: usize,
    a: f64,
    b: f64,
    n_smooth: usize,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(seeds as usize);
    for seed in 0..seeds {
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, n_steps)?, 1, seed);
        let w = path.component(1).to_vec();
        out.push(saltlab::stratonovich::fundamental_lemma_check(
            &w, &path, 1, a, b, n_smooth,
        )?);
    }
    Ok(out)
}

/// Fraction of seeds whose final ramp error is below a tenth of the first.
pub fn lemma_success_count(sequences: &[Vec<f64>]) -> usize {
    sequences
        .iter()
        .filter(|e| e.last().unwrap() < &(e[0] / 10.0))
        .count()
}

/// Standard KIW invariance experiment: a steady random divergence-free
/// velocity plus a small Fourier noise basis transports a smooth scalar on
/// the grid and a particle cloud along the same realization. Returns the
/// final-time residual `max_p |a(T, x_T) - a_0(x_0)|` at refinement
/// `level` (each level halves `dt`, doubles the grid, bridge-refines the
/// path).
pub fn kiw_residual_at_level(
    seed: u64,
    level: u32,
    base_n: usize,
    base_steps: usize,
    t_end: f64,
    n_particles: usize,
    noise: &NoiseParams,
) -> Result<f64> {
    let factor = 1usize << level;
    let grid = Grid2D::new(base_n * factor, base_n * factor)?;
    let basis = noise.build(grid)?;
    let u = random_divergence_free(grid, 3, 0.3, seed.wrapping_add(5));
    let a0 = random_band_limited(grid, 3, 1.0, seed.wrapping_add(6));
    let mut path = sample_brownian(TimeGrid::new(0.0, t_end, base_steps)?, noise.k, seed);
    for l in 0..level {
        path = refine(&path, 2, seed.wrapping_add(2000 + l as u64))?;
    }
    let n1 = path.grid.n_steps;
    let a_t = advect_scalar_steady(&a0, &u, &basis, &path, 0, n1)?;
    let particles = ParticleSet::scatter(n_particles, seed.wrapping_add(7));
    let moved = advance_particles_steady(&particles, &u, &basis, &path, 0, n1)?;
    kiw_final_residual(&a0, &a_t, &moved)
}

/// Standard rotating shallow water experiment: random balanced-ish smooth
/// state, small Fourier noise, particles carried along `dx_t` inside the
/// run loop. Returns `(relative mass drift, PV-along-particles residual)`
/// at refinement `level`.
pub fn rsw_mass_and_pv_residual(
    seed: u64,
    level: u32,
    base_n: usize,
    base_steps: usize,
    t_end: f64,
    n_particles: usize,
    noise: &NoiseParams,
) -> Result<(f64, f64)> {
    let factor = 1usize << level;
    let grid = Grid2D::new(base_n * factor, base_n * factor)?;
    let params = RswParams::constant_f(grid, 0.1, 1.0, 1.0)?;
    let basis = noise.build(grid)?;
    let u0 = random_divergence_free(grid, 3, 0.2, seed.wrapping_add(11));
    let mut eta0 = random_band_limited(grid, 3, 0.05, seed.wrapping_add(12));
    eta0.add_constant(1.0);
    let mut path = sample_brownian(TimeGrid::new(0.0, t_end, base_steps)?, noise.k, seed);
    for l in 0..level {
        path = refine(&path, 2, seed.wrapping_add(3000 + l as u64))?;
    }

    let mut state = RswState::new(u0, eta0)?;
    let mass0 = rsw_diagnostics(&state, &params).mass;
    let q0 = potential_vorticity(&state, &params);
    let mut particles = ParticleSet::scatter(n_particles, seed.wrapping_add(13));
    let q0_at_particles = interpolate(&q0, particles.positions())?;

    let mut interp_n = InterpVelocity::new(&state.u);
    for n in 0..path.grid.n_steps {
        let ds = path.increments(n);
        let next = step_rsw(&state, &params, &basis, &ds)?;
        let interp_np1 = InterpVelocity::new(&next.u);
        particle_step(&mut particles, &interp_n, &interp_np1, &basis, &ds)?;
        interp_n = interp_np1;
        state = next;
    }
    let mass_drift = (rsw_diagnostics(&state, &params).mass - mass0).abs() / mass0.abs();
    let q_t = potential_vorticity(&state, &params);
    let q_at_particles = interpolate(&q_t, particles.positions())?;
    let pv_residual = q_at_particles
        .iter()
        .zip(&q0_at_particles)
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
    Ok((mass_drift, pv_residual))
}

/// Dual-formulation discrepancy: relative L2 distance between the
/// vorticity-form solution and the curl of the velocity-form solution on
/// the same path.
pub fn dual_formulation_discrepancy(
    seed: u64,
    n: usize,
    n_steps: usize,
    t_end: f64,
) -> Result<f64> {
    let grid = Grid2D::new(n, n)?;
    let basis = make_fourier_basis(grid, 2, 2.0, 0.1, 2)?;
    let u0 = random_divergence_free(grid, 4, 0.5, seed.wrapping_add(23));
    let omega0 = curl2d(&u0);
    let path = sample_brownian(TimeGrid::new(0.0, t_end, n_steps)?, 2, seed);
    let opts = VelocityOptions { project_noise_channels: true, compute_pressure: false };
    let (vel, _) = velocity_run(u0, &basis, &path, 0, n_steps, opts)?;
    let vor = vorticity_run(omega0, &basis, &path, 0, n_steps)?;
    let c = curl2d(&vel.u);
    Ok(c.sub(&vor.omega).l2_norm() / vor.omega.l2_norm())
}

/// Energy drift of the deterministic Taylor-Green run plus the max-norm
/// distance of the final vorticity from the initial.
pub fn taylor_green_steadiness(n: usize, n_steps: usize, dt: f64) -> Result<(f64, f64)> {
    let grid = Grid2D::new(n, n)?;
    let basis = NoiseBasis::empty(grid);
    let omega0 = taylor_green_vorticity(grid);
    let d0 = diagnostics_vorticity(&VorticityState::new(omega0.clone()), &basis);
    let mut state = VorticityState::new(omega0.clone());
    for _ in 0..n_steps {
        state = step_vorticity(&state, &basis, &[dt])?;
    }
    let d1 = diagnostics_vorticity(&state, &basis);
    Ok((state.omega.sub(&omega0).linf(), (d1.energy - d0.energy).abs() / d0.energy))
}

/// Velocity of the standard random Euler initial condition.
pub fn standard_velocity_ic(grid: Grid2D, seed: u64) -> VectorField2D {
    velocity_from_vorticity(&standard_vorticity_ic(grid, seed))
}
