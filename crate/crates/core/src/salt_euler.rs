//! Incompressible stochastic Euler flow with transport noise on the
//! 2-torus, in two equivalent formulations:
//!
//! - vorticity form: `d omega + dx_t . grad omega = 0` with
//!   `u = perp-grad inv_laplacian(omega)` (the curl of the momentum
//!   equation; every gradient term is annihilated);
//! - velocity form:
//!   `du + (dx_t . grad) u + sum_j u_j grad (dx_t)_j + grad dp = 0`,
//!   where `dx_t = u dt + sum_k xi_k o dW^k` and the two-part pressure
//!   `dp = P0 dt + sum_k Pk o dW^k` is realized by a Leray projection
//!   applied separately to the `dt` tendency and to every noise-channel
//!   tendency. Drift and each channel must be divergence-free on their own
//!   (the discrete counterpart of the uniqueness of the semimartingale
//!   decomposition), which is why a single deterministic pressure cannot
//!   close the system.
//!
//! Pressure is diagnostic here: [`pressure_components`] evaluates the
//! explicit Poisson forms
//! `P0   = inv_lap( -sum_ij du_i/dx_j du_j/dx_i )`,
//! `Pk   = inv_lap( -(lap xi_k).u - sum_ij dxi_k^i/dx_j (du_i/dx_j + du_j/dx_i) )`
//! in the zero-mean gauge.
//!
//! Time stepping is stochastic Heun (predictor + one corrector sweep) on
//! the Stratonovich increments; quadratic products are dealiased by the 2/3
//! rule; the vorticity zero mode is frozen so mean vorticity is conserved
//! exactly.

use crate::error::{Error, Result};
use crate::fields::{
    leray_project_spectral, Grid2D, ScalarField, Spectrum, VectorField2D,
};
use crate::noise_basis::NoiseBasis;

/// Prognostic state of the vorticity-form solver.
#[derive(Debug, Clone)]
pub struct VorticityState {
    pub time: f64,
    pub step: u64,
    pub omega: ScalarField,
}

impl VorticityState {
    pub fn new(omega: ScalarField) -> Self {
        VorticityState { time: 0.0, step: 0, omega }
    }
}

/// Prognostic state of the velocity-form solver, carrying the latest
/// diagnosed pressure components.
#[derive(Debug, Clone)]
pub struct VelocityState {
    pub time: f64,
    pub step: u64,
    pub u: VectorField2D,
    pub p0: ScalarField,
    pub pk: Vec<ScalarField>,
}

impl VelocityState {
    pub fn new(u: VectorField2D) -> Self {
        let grid = u.grid();
        VelocityState { time: 0.0, step: 0, u, p0: ScalarField::zeros(grid), pk: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Vorticity,
    Velocity,
}

/// Knobs for the velocity-form stepper. `project_noise_channels = false`
/// suppresses the stochastic pressure components `Pk` (keeping only the
/// deterministic `P0` projection), which demonstrably breaks per-channel
/// incompressibility.
#[derive(Debug, Clone, Copy)]
pub struct VelocityOptions {
    pub project_noise_channels: bool,
    pub compute_pressure: bool,
}

impl Default for VelocityOptions {
    fn default() -> Self {
        VelocityOptions { project_noise_channels: true, compute_pressure: true }
    }
}

/// Per-step report of the velocity stepper: RMS divergence of each channel
/// tendency (index 0 = `dt` channel) after its projection treatment,
/// maximized over the two Heun stages.
#[derive(Debug, Clone)]
pub struct VelocityStepReport {
    pub channel_div_rms: Vec<f64>,
}

fn check_sizes(grid: Grid2D, basis: &NoiseBasis, ds: &[f64]) -> Result<()> {
    if basis.len() + 1 != ds.len() {
        return Err(Error::invalid(format!(
            "expected {} increments (dt + {} noise channels), got {}",
            basis.len() + 1,
            basis.len(),
            ds.len()
        )));
    }
    if !basis.is_empty() && basis.grid() != grid {
        return Err(Error::invalid("noise basis grid does not match state grid"));
    }
    Ok(())
}

/// Streamfunction velocity `u = (-d psi/dy, d psi/dx)`, `psi = inv_lap(omega)`.
pub fn velocity_from_vorticity(omega: &ScalarField) -> VectorField2D {
    let psi = Spectrum::from_field(omega).inv_laplacian();
    let mut ux = psi.dy().to_field();
    ux.scale(-1.0);
    VectorField2D { x: ux, y: psi.dx().to_field() }
}

/// One Stratonovich-Heun step of `d omega = -(u dt + sum xi_k dW_k) . grad omega`.
pub fn step_vorticity(
    state: &VorticityState,
    basis: &NoiseBasis,
    ds: &[f64],
) -> Result<VorticityState> {
    let grid = state.omega.grid;
    check_sizes(grid, basis, ds)?;
    let mut w_hat = Spectrum::from_field(&state.omega);
    w_hat.dealias();
    let t0 = vorticity_increment(&w_hat, basis, ds);
    let mut predictor = w_hat.clone();
    predictor.add_scaled(1.0, &t0);
    let t1 = vorticity_increment(&predictor, basis, ds);
    let mut new_hat = w_hat;
    new_hat.add_scaled(0.5, &t0);
    new_hat.add_scaled(0.5, &t1);
    let omega = new_hat.to_field();
    if !omega.is_finite() {
        return Err(Error::NonFinite { context: "step_vorticity", step: state.step + 1 });
    }
    Ok(VorticityState { time: state.time + ds[0], step: state.step + 1, omega })
}

fn vorticity_increment(w_hat: &Spectrum, basis: &NoiseBasis, ds: &[f64]) -> Spectrum {
    let grid = w_hat.grid;
    let psi = w_hat.inv_laplacian();
    let mut ax = psi.dy().to_field();
    ax.scale(-ds[0]);
    let mut ay = psi.dx().to_field();
    ay.scale(ds[0]);
    for k in 0..basis.len() {
        let dw = ds[k + 1];
        if dw != 0.0 {
            let xi = basis.xi(k);
            ax.add_scaled(dw, &xi.x);
            ay.add_scaled(dw, &xi.y);
        }
    }
    let wx = w_hat.dx().to_field();
    let wy = w_hat.dy().to_field();
    let mut prod = ScalarField::zeros(grid);
    {
        let p = prod.data_mut();
        for (i, v) in p.iter_mut().enumerate() {
            *v = ax.data()[i] * wx.data()[i] + ay.data()[i] * wy.data()[i];
        }
    }
    let mut t_hat = Spectrum::from_field(&prod);
    t_hat.scale(-1.0);
    t_hat.dealias();
    // freeze the zero mode: mean vorticity is conserved exactly
    t_hat.set_zero_mode(Default::default());
    t_hat
}

/// One Stratonovich-Heun step of the velocity form with default options.
pub fn step_velocity(
    state: &VelocityState,
    basis: &NoiseBasis,
    ds: &[f64],
) -> Result<(VelocityState, VelocityStepReport)> {
    step_velocity_with(state, basis, ds, VelocityOptions::default())
}

/// Velocity-form step with explicit options.
pub fn step_velocity_with(
    state: &VelocityState,
    basis: &NoiseBasis,
    ds: &[f64],
    opts: VelocityOptions,
) -> Result<(VelocityState, VelocityStepReport)> {
    let grid = state.u.grid();
    check_sizes(grid, basis, ds)?;
    let mut uh = Spectrum::from_field(&state.u.x);
    let mut vh = Spectrum::from_field(&state.u.y);
    uh.dealias();
    vh.dealias();
    let mut divs = vec![0.0_f64; basis.len() + 1];
    let (iu0, iv0) = velocity_increment(&uh, &vh, basis, ds, opts, &mut divs);
    let mut pu = uh.clone();
    pu.add_scaled(1.0, &iu0);
    let mut pv = vh.clone();
    pv.add_scaled(1.0, &iv0);
    let (iu1, iv1) = velocity_increment(&pu, &pv, basis, ds, opts, &mut divs);
    let mut nu = uh;
    nu.add_scaled(0.5, &iu0);
    nu.add_scaled(0.5, &iu1);
    let mut nv = vh;
    nv.add_scaled(0.5, &iv0);
    nv.add_scaled(0.5, &iv1);
    let u = VectorField2D { x: nu.to_field(), y: nv.to_field() };
    if !u.is_finite() {
        return Err(Error::NonFinite { context: "step_velocity", step: state.step + 1 });
    }
    let (p0, pk) = if opts.compute_pressure {
        pressure_components(&u, basis)
    } else {
        (ScalarField::zeros(grid), Vec::new())
    };
    Ok((
        VelocityState { time: state.time + ds[0], step: state.step + 1, u, p0, pk },
        VelocityStepReport { channel_div_rms: divs },
    ))
}

/// RMS of the divergence of a spectral tendency pair via Parseval
/// (first-derivative convention, Nyquist zeroed).
fn divergence_rms(xh: &Spectrum, yh: &Spectrum) -> f64 {
    let mut dx = xh.dx();
    dx.add_scaled(1.0, &yh.dy());
    let n = xh.grid.n_points() as f64;
    (dx.data().iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt() / n
}

fn velocity_increment(
    uh: &Spectrum,
    vh: &Spectrum,
    basis: &NoiseBasis,
    ds: &[f64],
    opts: VelocityOptions,
    div_report: &mut [f64],
) -> (Spectrum, Spectrum) {
    let grid = uh.grid;
    let u = uh.to_field();
    let v = vh.to_field();
    let ux = uh.dx().to_field();
    let uy = uh.dy().to_field();
    let vx = vh.dx().to_field();
    let vy = vh.dy().to_field();

    let mut inc_u = Spectrum::zeros(grid);
    let mut inc_v = Spectrum::zeros(grid);

    // dt channel: -(u . grad) u, projected
    {
        let mut cx = ScalarField::zeros(grid);
        let mut cy = ScalarField::zeros(grid);
        for i in 0..grid.n_points() {
            cx.data_mut()[i] = u.data()[i] * ux.data()[i] + v.data()[i] * uy.data()[i];
            cy.data_mut()[i] = u.data()[i] * vx.data()[i] + v.data()[i] * vy.data()[i];
        }
        let mut cxh = Spectrum::from_field(&cx);
        let mut cyh = Spectrum::from_field(&cy);
        cxh.dealias();
        cyh.dealias();
        leray_project_spectral(&mut cxh, &mut cyh);
        div_report[0] = div_report[0].max(divergence_rms(&cxh, &cyh));
        inc_u.add_scaled(-ds[0], &cxh);
        inc_v.add_scaled(-ds[0], &cyh);
    }

    // noise channels: -((xi_k . grad) u + sum_j u_j grad xi_k^j), each
    // projected on its own (the stochastic pressure channel Pk)
    for k in 0..basis.len() {
        let dw = ds[k + 1];
        if dw == 0.0 && opts.project_noise_channels {
            continue;
        }
        let xi = basis.xi(k);
        let g = basis.gradient(k);
        let mut ax = ScalarField::zeros(grid);
        let mut ay = ScalarField::zeros(grid);
        for i in 0..grid.n_points() {
            ax.data_mut()[i] = xi.x.data()[i] * ux.data()[i]
                + xi.y.data()[i] * uy.data()[i]
                + u.data()[i] * g.xx.data()[i]
                + v.data()[i] * g.yx.data()[i];
            ay.data_mut()[i] = xi.x.data()[i] * vx.data()[i]
                + xi.y.data()[i] * vy.data()[i]
                + u.data()[i] * g.xy.data()[i]
                + v.data()[i] * g.yy.data()[i];
        }
        let mut axh = Spectrum::from_field(&ax);
        let mut ayh = Spectrum::from_field(&ay);
        axh.dealias();
        ayh.dealias();
        if opts.project_noise_channels {
            leray_project_spectral(&mut axh, &mut ayh);
        }
        div_report[k + 1] = div_report[k + 1].max(divergence_rms(&axh, &ayh));
        if dw != 0.0 {
            inc_u.add_scaled(-dw, &axh);
            inc_v.add_scaled(-dw, &ayh);
        }
    }
    (inc_u, inc_v)
}

/// Diagnose the two-part pressure of the velocity form from the divergence
/// constraint, in the zero-mean gauge.
pub fn pressure_components(u: &VectorField2D, basis: &NoiseBasis) -> (ScalarField, Vec<ScalarField>) {
    let grid = u.grid();
    let uh = Spectrum::from_field(&u.x);
    let vh = Spectrum::from_field(&u.y);
    let ux = uh.dx().to_field();
    let uy = uh.dy().to_field();
    let vx = vh.dx().to_field();
    let vy = vh.dy().to_field();

    let mut q0 = ScalarField::zeros(grid);
    for i in 0..grid.n_points() {
        let (a, b, c, d) = (ux.data()[i], uy.data()[i], vx.data()[i], vy.data()[i]);
        q0.data_mut()[i] = -(a * a + 2.0 * b * c + d * d);
    }
    let mut q0h = Spectrum::from_field(&q0);
    q0h.dealias();
    let p0 = q0h.inv_laplacian().to_field();

    let mut pk = Vec::with_capacity(basis.len());
    for k in 0..basis.len() {
        let lap = basis.mode_laplacian(k);
        let g = basis.gradient(k);
        let mut qk = ScalarField::zeros(grid);
        for i in 0..grid.n_points() {
            let (a, b, c, d) = (ux.data()[i], uy.data()[i], vx.data()[i], vy.data()[i]);
            let adv = lap.x.data()[i] * u.x.data()[i] + lap.y.data()[i] * u.y.data()[i];
            let s1 = g.xx.data()[i] * a + g.xy.data()[i] * b + g.yx.data()[i] * c
                + g.yy.data()[i] * d;
            let s2 = g.xx.data()[i] * a + g.xy.data()[i] * c + g.yx.data()[i] * b
                + g.yy.data()[i] * d;
            qk.data_mut()[i] = -(adv + s1 + s2);
        }
        let mut qkh = Spectrum::from_field(&qk);
        qkh.dealias();
        pk.push(qkh.inv_laplacian().to_field());
    }
    (p0, pk)
}

/// Conserved and monitored quantities of the Euler solvers.
#[derive(Debug, Clone)]
pub struct EulerDiagnostics {
    pub step: u64,
    pub time: f64,
    /// Kinetic energy `1/2 integral |u|^2`.
    pub energy: f64,
    /// Enstrophy `1/2 integral omega^2`.
    pub enstrophy: f64,
    /// Quartic Casimir `integral omega^4`.
    pub casimir4: f64,
    pub div_rms: f64,
    pub p0_norm: f64,
    pub pk_norm_total: f64,
}

fn diagnostics_from_parts(
    step: u64,
    time: f64,
    u: &VectorField2D,
    omega: &ScalarField,
    p0: &ScalarField,
    pk: &[ScalarField],
) -> EulerDiagnostics {
    let grid = u.grid();
    let cell = grid.hx() * grid.hy();
    let mut energy = 0.0;
    for (a, b) in u.x.data().iter().zip(u.y.data()) {
        energy += a * a + b * b;
    }
    energy *= 0.5 * cell;
    let mut enstrophy = 0.0;
    let mut casimir4 = 0.0;
    for w in omega.data() {
        enstrophy += w * w;
        casimir4 += w * w * w * w;
    }
    enstrophy *= 0.5 * cell;
    casimir4 *= cell;
    EulerDiagnostics {
        step,
        time,
        energy,
        enstrophy,
        casimir4,
        div_rms: crate::fields::divergence(u).rms(),
        p0_norm: p0.l2_norm(),
        pk_norm_total: pk.iter().map(|p| p.l2_norm()).sum(),
    }
}

/// Diagnostics of a vorticity-form state (pressure recomputed from the
/// induced velocity).
pub fn diagnostics_vorticity(state: &VorticityState, basis: &NoiseBasis) -> EulerDiagnostics {
    let u = velocity_from_vorticity(&state.omega);
    let (p0, pk) = pressure_components(&u, basis);
    diagnostics_from_parts(state.step, state.time, &u, &state.omega, &p0, &pk)
}

/// Diagnostics of a velocity-form state, using its stored pressure.
pub fn diagnostics_velocity(state: &VelocityState) -> EulerDiagnostics {
    let omega = crate::fields::curl2d(&state.u);
    diagnostics_from_parts(state.step, state.time, &state.u, &omega, &state.p0, &state.pk)
}

/// Advisory CFL check: noisy transport distance per step against half a
/// cell, using the median noise increment `0.6745 sqrt(dt)`.
pub fn cfl_exceeded(umax: f64, basis: &NoiseBasis, dt: f64, h: f64) -> bool {
    umax * dt + basis.max_sup_norm() * 0.6745 * dt.sqrt() > 0.5 * h
}

/// Steady Taylor-Green vorticity `2 sin x sin y`.
pub fn taylor_green_vorticity(grid: Grid2D) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| 2.0 * x.sin() * y.sin())
}

/// Velocity of the Taylor-Green vortex, `(sin x cos y, -cos x sin y)`.
pub fn taylor_green_velocity(grid: Grid2D) -> VectorField2D {
    VectorField2D {
        x: ScalarField::from_fn(grid, |x, y| x.sin() * y.cos()),
        y: ScalarField::from_fn(grid, |x, y| -(x.cos()) * y.sin()),
    }
}
