//! Stochastic rotating shallow water in vector-invariant (curl) form on
//! the 2-torus, with transport noise in both the momentum and continuity
//! equations:
//!
//! ```text
//! eps du = [ u x Phi z - grad(eps/2 |u|^2 + k) ] dt
//!        + sum_i [ xi_i x Phi z - grad(xi_i . (eps u + R)) ] o dW^i
//! d eta  = -div(eta u) dt - sum_i div(eta xi_i) o dW^i
//! ```
//!
//! with total vorticity `Phi = eps curl u + f` and layer forcing
//! `k = (eta - b) / (eps F)`. The deterministic limit is exactly the
//! classical rotating shallow water momentum equation
//! `eps (u_t + u.grad u) + f z x u + grad k = 0`.
//!
//! On the torus a constant Coriolis parameter has no periodic vector
//! potential (a periodic `R` satisfies `mean(curl R) = 0`), so `R` is the
//! divergence-free periodic field with `curl R = f - mean(f)` and the mean
//! rotation enters through `Phi`, which only ever uses `f` itself. For
//! zero-mean `f` this is precisely `curl R = f`.
//!
//! Gradient terms are annihilated by the curl, so total vorticity advects
//! as a density along `dx_t` and the potential vorticity
//! `q = (eps curl u + f) / eta` is materially conserved; the continuity
//! update is flux-form in spectral space, conserving total mass to machine
//! precision.

use crate::error::{Error, Result};
use crate::fields::{curl2d, Grid2D, ScalarField, Spectrum, VectorField2D};
use crate::noise_basis::NoiseBasis;

/// Prognostic state: velocity and total depth.
#[derive(Debug, Clone)]
pub struct RswState {
    pub time: f64,
    pub step: u64,
    pub u: VectorField2D,
    pub eta: ScalarField,
}

impl RswState {
    pub fn new(u: VectorField2D, eta: ScalarField) -> Result<Self> {
        if u.grid() != eta.grid {
            return Err(Error::invalid("velocity and depth must share a grid"));
        }
        Ok(RswState { time: 0.0, step: 0, u, eta })
    }

    /// Rest state with uniform depth.
    pub fn rest(grid: Grid2D, depth: f64) -> Self {
        RswState {
            time: 0.0,
            step: 0,
            u: VectorField2D::zeros(grid),
            eta: ScalarField::constant(grid, depth),
        }
    }
}

/// Physical parameters; `r` is the periodic rotation potential with
/// `curl r = f - mean(f)`.
#[derive(Debug, Clone)]
pub struct RswParams {
    pub epsilon: f64,
    pub froude: f64,
    pub f: ScalarField,
    pub b: ScalarField,
    pub r: VectorField2D,
}

impl RswParams {
    pub fn new(epsilon: f64, froude: f64, f: ScalarField, b: ScalarField) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be > 0 (got {epsilon})")));
        }
        if !(froude.is_finite() && froude > 0.0) {
            return Err(Error::invalid(format!("froude must be > 0 (got {froude})")));
        }
        if f.grid != b.grid {
            return Err(Error::invalid("f and b must share a grid"));
        }
        let mut f_prime = f.clone();
        f_prime.add_constant(-f.mean());
        let psi = Spectrum::from_field(&f_prime).inv_laplacian();
        let mut rx = psi.dy().to_field();
        rx.scale(-1.0);
        let r = VectorField2D { x: rx, y: psi.dx().to_field() };
        Ok(RswParams { epsilon, froude, f, b, r })
    }

    /// Constant Coriolis parameter over flat topography.
    pub fn constant_f(grid: Grid2D, epsilon: f64, froude: f64, f0: f64) -> Result<Self> {
        RswParams::new(
            epsilon,
            froude,
            ScalarField::constant(grid, f0),
            ScalarField::zeros(grid),
        )
    }

    /// Layer forcing `k = (eta - b) / (eps F)`.
    pub fn k_field(&self, eta: &ScalarField) -> ScalarField {
        let mut k = eta.sub(&self.b);
        k.scale(1.0 / (self.epsilon * self.froude));
        k
    }
}

struct StageIncrement {
    du: Spectrum,
    dv: Spectrum,
    de: Spectrum,
}

fn rsw_increment(
    uh: &Spectrum,
    vh: &Spectrum,
    eh: &Spectrum,
    params: &RswParams,
    basis: &NoiseBasis,
    ds: &[f64],
) -> StageIncrement {
    let grid = uh.grid;
    let eps = params.epsilon;
    let u = uh.to_field();
    let v = vh.to_field();
    let eta = eh.to_field();
    // total vorticity Phi = eps zeta + f
    let mut zeta_hat = vh.dx();
    zeta_hat.add_scaled(-1.0, &uh.dy());
    let mut phi = zeta_hat.to_field();
    phi.scale(eps);
    phi.add_scaled(1.0, &params.f);

    let n = grid.n_points();
    let mut du = Spectrum::zeros(grid);
    let mut dv = Spectrum::zeros(grid);
    let mut de = Spectrum::zeros(grid);

    let flux_div = |carrier_x: &ScalarField, carrier_y: &ScalarField| -> Spectrum {
        let fx = eta.mul(carrier_x);
        let fy = eta.mul(carrier_y);
        let mut t = Spectrum::from_field(&fx).dx();
        t.add_scaled(1.0, &Spectrum::from_field(&fy).dy());
        t.scale(-1.0);
        t.dealias();
        t.set_zero_mode(Default::default());
        t
    };

    // dt channel
    {
        let dt = ds[0];
        // s = eps/2 |u|^2 + k
        let mut s = params.k_field(&eta);
        for i in 0..n {
            s.data_mut()[i] += 0.5 * eps * (u.data()[i] * u.data()[i] + v.data()[i] * v.data()[i]);
        }
        let mut s_hat = Spectrum::from_field(&s);
        s_hat.dealias();
        let mut mx = Spectrum::from_field(&v.mul(&phi));
        mx.dealias();
        mx.add_scaled(-1.0, &s_hat.dx());
        let mut my = Spectrum::from_field(&u.mul(&phi));
        my.scale(-1.0);
        my.dealias();
        my.add_scaled(-1.0, &s_hat.dy());
        du.add_scaled(dt / eps, &mx);
        dv.add_scaled(dt / eps, &my);
        de.add_scaled(dt, &flux_div(&u, &v));
    }

    // noise channels
    for k in 0..basis.len() {
        let dw = ds[k + 1];
        if dw == 0.0 {
            continue;
        }
        let xi = basis.xi(k);
        // dot = xi . (eps u + R)
        let mut dot = ScalarField::zeros(grid);
        for i in 0..n {
            dot.data_mut()[i] = xi.x.data()[i] * (eps * u.data()[i] + params.r.x.data()[i])
                + xi.y.data()[i] * (eps * v.data()[i] + params.r.y.data()[i]);
        }
        let mut dot_hat = Spectrum::from_field(&dot);
        dot_hat.dealias();
        let mut mx = Spectrum::from_field(&xi.y.mul(&phi));
        mx.dealias();
        mx.add_scaled(-1.0, &dot_hat.dx());
        let mut my = Spectrum::from_field(&xi.x.mul(&phi));
        my.scale(-1.0);
        my.dealias();
        my.add_scaled(-1.0, &dot_hat.dy());
        du.add_scaled(dw / eps, &mx);
        dv.add_scaled(dw / eps, &my);
        de.add_scaled(dw, &flux_div(&xi.x, &xi.y));
    }

    StageIncrement { du, dv, de }
}

/// One Stratonovich-Heun step of the stochastic rotating shallow water
/// system. Aborts on non-finite values or non-positive depth.
pub fn step_rsw(
    state: &RswState,
    params: &RswParams,
    basis: &NoiseBasis,
    ds: &[f64],
) -> Result<RswState> {
    let grid = state.u.grid();
    if basis.len() + 1 != ds.len() {
        return Err(Error::invalid(format!(
            "expected {} increments, got {}",
            basis.len() + 1,
            ds.len()
        )));
    }
    if !basis.is_empty() && basis.grid() != grid {
        return Err(Error::invalid("noise basis grid does not match state grid"));
    }
    if state.eta.min() <= 0.0 {
        return Err(Error::DepthNonPositive { min_eta: state.eta.min(), step: state.step });
    }
    let mut uh = Spectrum::from_field(&state.u.x);
    let mut vh = Spectrum::from_field(&state.u.y);
    let mut eh = Spectrum::from_field(&state.eta);
    uh.dealias();
    vh.dealias();
    eh.dealias();

    let s0 = rsw_increment(&uh, &vh, &eh, params, basis, ds);
    let mut pu = uh.clone();
    pu.add_scaled(1.0, &s0.du);
    let mut pv = vh.clone();
    pv.add_scaled(1.0, &s0.dv);
    let mut pe = eh.clone();
    pe.add_scaled(1.0, &s0.de);
    let s1 = rsw_increment(&pu, &pv, &pe, params, basis, ds);

    uh.add_scaled(0.5, &s0.du);
    uh.add_scaled(0.5, &s1.du);
    vh.add_scaled(0.5, &s0.dv);
    vh.add_scaled(0.5, &s1.dv);
    eh.add_scaled(0.5, &s0.de);
    eh.add_scaled(0.5, &s1.de);

    let u = VectorField2D { x: uh.to_field(), y: vh.to_field() };
    let eta = eh.to_field();
    if !(u.is_finite() && eta.is_finite()) {
        return Err(Error::NonFinite { context: "step_rsw", step: state.step + 1 });
    }
    if eta.min() <= 0.0 {
        return Err(Error::DepthNonPositive { min_eta: eta.min(), step: state.step + 1 });
    }
    Ok(RswState { time: state.time + ds[0], step: state.step + 1, u, eta })
}

/// Potential vorticity `(eps curl u + f) / eta` from raw parts; tolerates
/// `eps = 0` (planetary PV).
pub fn pv_field(u: &VectorField2D, eta: &ScalarField, f: &ScalarField, epsilon: f64) -> ScalarField {
    let mut q = curl2d(u);
    q.scale(epsilon);
    q.add_scaled(1.0, f);
    let mut out = q;
    for (v, e) in out.data_mut().iter_mut().zip(eta.data()) {
        *v /= e;
    }
    out
}

/// Potential vorticity of a solver state.
pub fn potential_vorticity(state: &RswState, params: &RswParams) -> ScalarField {
    pv_field(&state.u, &state.eta, &params.f, params.epsilon)
}

/// Monitored quantities of the shallow water solver.
#[derive(Debug, Clone)]
pub struct RswDiagnostics {
    pub step: u64,
    pub time: f64,
    /// Total mass `integral eta`.
    pub mass: f64,
    /// `integral( eps/2 eta |u|^2 + (eta - b)^2 / (2 eps F) )`.
    pub energy: f64,
    pub pv_min: f64,
    pub pv_max: f64,
    pub eta_min: f64,
}

pub fn rsw_diagnostics(state: &RswState, params: &RswParams) -> RswDiagnostics {
    let grid = state.u.grid();
    let cell = grid.hx() * grid.hy();
    let eps = params.epsilon;
    let mut energy = 0.0;
    for i in 0..grid.n_points() {
        let speed2 = state.u.x.data()[i] * state.u.x.data()[i]
            + state.u.y.data()[i] * state.u.y.data()[i];
        let dev = state.eta.data()[i] - params.b.data()[i];
        energy += 0.5 * eps * state.eta.data()[i] * speed2
            + dev * dev / (2.0 * eps * params.froude);
    }
    energy *= cell;
    let q = potential_vorticity(state, params);
    RswDiagnostics {
        step: state.step,
        time: state.time,
        mass: state.eta.integral(),
        energy,
        pv_min: q.min(),
        pv_max: q.max(),
        eta_min: state.eta.min(),
    }
}
