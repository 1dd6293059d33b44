//! Stochastic characteristics and grid advection along
//! `dx_t = u dt + sum_k xi_k o dW^k`.
//!
//! Particles and grid fields share the same driving-path realization and
//! the same Heun discretization, so the pathwise invariance check
//! `a_t(x_t) = a_0(x_0)` isolates discretization error rather than
//! time-scheme mismatch. Particle velocities are trigonometrically
//! interpolated (exact for band-limited fields); noise velocities are
//! evaluated from their closed forms.

use crate::error::{Error, Result};
use crate::fields::{make_phases, ScalarField, Spectrum, VectorField2D};
use crate::noise_basis::NoiseBasis;
use crate::paths::DrivingPath;
use rustfft::num_complex::Complex64;
use std::f64::consts::TAU;

/// Tracked particles; initial positions are retained for invariance checks.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    positions: Vec<[f64; 2]>,
    initial: Vec<[f64; 2]>,
}

fn fold(p: [f64; 2]) -> [f64; 2] {
    [p[0].rem_euclid(TAU), p[1].rem_euclid(TAU)]
}

impl ParticleSet {
    pub fn new(positions: Vec<[f64; 2]>) -> Self {
        let positions: Vec<[f64; 2]> = positions.into_iter().map(fold).collect();
        ParticleSet { initial: positions.clone(), positions }
    }

    /// Deterministic scatter of `n` particles.
    pub fn scatter(n: usize, seed: u64) -> Self {
        let mut draws = crate::rng::NormalStream::new(seed, 0x5041_5254, 0);
        let positions = (0..n)
            .map(|_| fold([draws.next_normal() * 2.0, draws.next_normal() * 2.0]))
            .collect();
        ParticleSet::new(positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn initial(&self) -> &[[f64; 2]] {
        &self.initial
    }
}

/// Velocity field prepared for fast trigonometric point evaluation.
pub struct InterpVelocity {
    sx: Spectrum,
    sy: Spectrum,
}

impl InterpVelocity {
    pub fn new(u: &VectorField2D) -> Self {
        InterpVelocity { sx: Spectrum::from_field(&u.x), sy: Spectrum::from_field(&u.y) }
    }

    fn eval(&self, p: [f64; 2], wx: &mut [Complex64], wy: &mut [Complex64]) -> Result<[f64; 2]> {
        make_phases(self.sx.grid, p, wx, wy)?;
        Ok([self.sx.eval_phases(wx, wy), self.sy.eval_phases(wx, wy)])
    }
}

/// One Heun step of every particle from path node `n` to `n + 1`;
/// `u_n` / `u_np1` are the velocity fields at the two nodes and `ds` the
/// `K + 1` path increments over the step.
pub fn particle_step(
    particles: &mut ParticleSet,
    u_n: &InterpVelocity,
    u_np1: &InterpVelocity,
    basis: &NoiseBasis,
    ds: &[f64],
) -> Result<()> {
    if ds.len() != basis.len() + 1 {
        return Err(Error::invalid(format!(
            "expected {} increments, got {}",
            basis.len() + 1,
            ds.len()
        )));
    }
    let grid = u_n.sx.grid;
    let mut wx = vec![Complex64::default(); grid.nx()];
    let mut wy = vec![Complex64::default(); grid.ny()];
    let dt = ds[0];
    let noise = &ds[1..];
    for p in &mut particles.positions {
        let v0 = {
            let uv = u_n.eval(*p, &mut wx, &mut wy)?;
            let nv = basis.eval_velocity_at(*p, noise);
            [uv[0] * dt + nv[0], uv[1] * dt + nv[1]]
        };
        let pred = [p[0] + v0[0], p[1] + v0[1]];
        let v1 = {
            let uv = u_np1.eval(pred, &mut wx, &mut wy)?;
            let nv = basis.eval_velocity_at(pred, noise);
            [uv[0] * dt + nv[0], uv[1] * dt + nv[1]]
        };
        let next = fold([p[0] + 0.5 * (v0[0] + v1[0]), p[1] + 0.5 * (v0[1] + v1[1])]);
        if !(next[0].is_finite() && next[1].is_finite()) {
            return Err(Error::NonFinite { context: "particle_step", step: 0 });
        }
        *p = next;
    }
    Ok(())
}

/// Advance particles along path nodes `n0..=n1`; `u_series[i]` is the
/// velocity at node `n0 + i`.
pub fn advance_particles(
    particles: &ParticleSet,
    u_series: &[VectorField2D],
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<ParticleSet> {
    Ok(particle_trajectory(particles, u_series, basis, path, n0, n1)?
        .pop()
        .expect("trajectory is never empty"))
}

/// Particle positions at every node `n0..=n1`.
pub fn particle_trajectory(
    particles: &ParticleSet,
    u_series: &[VectorField2D],
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<Vec<ParticleSet>> {
    check_series(u_series.len(), path, n0, n1)?;
    let mut out = Vec::with_capacity(n1 - n0 + 1);
    let mut current = particles.clone();
    out.push(current.clone());
    let mut interp_n = InterpVelocity::new(&u_series[0]);
    for n in n0..n1 {
        let interp_np1 = InterpVelocity::new(&u_series[n + 1 - n0]);
        let ds = path.increments(n);
        particle_step(&mut current, &interp_n, &interp_np1, basis, &ds)
            .map_err(|e| at_step(e, n as u64))?;
        out.push(current.clone());
        interp_n = interp_np1;
    }
    Ok(out)
}

/// Advance particles with a time-independent resolved velocity.
pub fn advance_particles_steady(
    particles: &ParticleSet,
    u: &VectorField2D,
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<ParticleSet> {
    let interp = InterpVelocity::new(u);
    let mut current = particles.clone();
    for n in n0..n1 {
        let ds = path.increments(n);
        particle_step(&mut current, &interp, &interp, basis, &ds)
            .map_err(|e| at_step(e, n as u64))?;
    }
    Ok(current)
}

fn at_step(e: Error, step: u64) -> Error {
    match e {
        Error::NonFinite { context, .. } => Error::NonFinite { context, step },
        other => other,
    }
}

fn check_series(len: usize, path: &DrivingPath, n0: usize, n1: usize) -> Result<()> {
    if n1 <= n0 || n1 > path.grid.n_steps {
        return Err(Error::invalid(format!("bad node range {n0}..{n1}")));
    }
    if len != n1 - n0 + 1 {
        return Err(Error::invalid(format!(
            "velocity series has {len} entries for nodes {n0}..={n1}"
        )));
    }
    Ok(())
}

enum Transport {
    /// `da = -(dx_t . grad) a`
    Scalar,
    /// `dD = -div(D dx_t)`, flux form with frozen zero mode
    Density,
}

fn transport_increment_hat(
    a_hat: &Spectrum,
    u: &VectorField2D,
    basis: &NoiseBasis,
    ds: &[f64],
    kind: &Transport,
) -> Spectrum {
    let grid = a_hat.grid;
    let mut ax = u.x.clone();
    ax.scale(ds[0]);
    let mut ay = u.y.clone();
    ay.scale(ds[0]);
    for k in 0..basis.len() {
        let dw = ds[k + 1];
        if dw != 0.0 {
            ax.add_scaled(dw, &basis.xi(k).x);
            ay.add_scaled(dw, &basis.xi(k).y);
        }
    }
    match kind {
        Transport::Scalar => {
            let gx = a_hat.dx().to_field();
            let gy = a_hat.dy().to_field();
            let mut prod = ScalarField::zeros(grid);
            for i in 0..grid.n_points() {
                prod.data_mut()[i] =
                    ax.data()[i] * gx.data()[i] + ay.data()[i] * gy.data()[i];
            }
            let mut t = Spectrum::from_field(&prod);
            t.scale(-1.0);
            t.dealias();
            t
        }
        Transport::Density => {
            let d = a_hat.to_field();
            let fx = d.mul(&ax);
            let fy = d.mul(&ay);
            let mut t = Spectrum::from_field(&fx).dx();
            t.add_scaled(1.0, &Spectrum::from_field(&fy).dy());
            t.scale(-1.0);
            t.dealias();
            // flux form: total mass is exactly conserved
            t.set_zero_mode(Default::default());
            t
        }
    }
}

fn advect_trajectory(
    a0: &ScalarField,
    u_series: &[VectorField2D],
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
    kind: Transport,
) -> Result<Vec<ScalarField>> {
    check_series(u_series.len(), path, n0, n1)?;
    let mut a_hat = Spectrum::from_field(a0);
    a_hat.dealias();
    let mut out = Vec::with_capacity(n1 - n0 + 1);
    out.push(a_hat.to_field());
    for n in n0..n1 {
        let ds = path.increments(n);
        let t0 = transport_increment_hat(&a_hat, &u_series[n - n0], basis, &ds, &kind);
        let mut predictor = a_hat.clone();
        predictor.add_scaled(1.0, &t0);
        let t1 = transport_increment_hat(&predictor, &u_series[n + 1 - n0], basis, &ds, &kind);
        a_hat.add_scaled(0.5, &t0);
        a_hat.add_scaled(0.5, &t1);
        let field = a_hat.to_field();
        if !field.is_finite() {
            return Err(Error::NonFinite { context: "advect", step: n as u64 });
        }
        out.push(field);
    }
    Ok(out)
}

/// Heun grid integration of scalar advection `da + dx_t . grad a = 0`;
/// returns the field at every node `n0..=n1`.
pub fn advect_scalar(
    a0: &ScalarField,
    u_series: &[VectorField2D],
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<Vec<ScalarField>> {
    advect_trajectory(a0, u_series, basis, path, n0, n1, Transport::Scalar)
}

/// Flux-form Heun integration of density advection
/// `dD + div(D dx_t) = 0`; total mass is conserved to machine precision.
pub fn advect_density(
    d0: &ScalarField,
    u_series: &[VectorField2D],
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<Vec<ScalarField>> {
    advect_trajectory(d0, u_series, basis, path, n0, n1, Transport::Density)
}

/// Scalar advection with a steady resolved velocity, returning only the
/// final field (memory-lean variant for refinement studies).
pub fn advect_scalar_steady(
    a0: &ScalarField,
    u: &VectorField2D,
    basis: &NoiseBasis,
    path: &DrivingPath,
    n0: usize,
    n1: usize,
) -> Result<ScalarField> {
    let mut a_hat = Spectrum::from_field(a0);
    a_hat.dealias();
    for n in n0..n1 {
        let ds = path.increments(n);
        let t0 = transport_increment_hat(&a_hat, u, basis, &ds, &Transport::Scalar);
        let mut predictor = a_hat.clone();
        predictor.add_scaled(1.0, &t0);
        let t1 = transport_increment_hat(&predictor, u, basis, &ds, &Transport::Scalar);
        a_hat.add_scaled(0.5, &t0);
        a_hat.add_scaled(0.5, &t1);
    }
    let field = a_hat.to_field();
    if !field.is_finite() {
        return Err(Error::NonFinite { context: "advect", step: n1 as u64 });
    }
    Ok(field)
}

/// Pathwise invariance residual `r_n = max_p |a(t_n, x_n^p) - a_0(x_0^p)|`
/// for a scalar series and a particle trajectory sampled at the same nodes.
pub fn kiw_residual(a_series: &[ScalarField], particles: &[ParticleSet]) -> Result<Vec<f64>> {
    if a_series.len() != particles.len() {
        return Err(Error::invalid(format!(
            "series lengths differ: {} fields vs {} particle sets",
            a_series.len(),
            particles.len()
        )));
    }
    if a_series.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    let reference = crate::fields::interpolate(&a_series[0], particles[0].initial())?;
    let mut out = Vec::with_capacity(a_series.len());
    for (a, p) in a_series.iter().zip(particles) {
        out.push(max_residual(a, p, &reference)?);
    }
    Ok(out)
}

/// Final-time residual against the initial condition.
pub fn kiw_final_residual(
    a0: &ScalarField,
    a_final: &ScalarField,
    particles: &ParticleSet,
) -> Result<f64> {
    let reference = crate::fields::interpolate(a0, particles.initial())?;
    max_residual(a_final, particles, &reference)
}

fn max_residual(a: &ScalarField, p: &ParticleSet, reference: &[f64]) -> Result<f64> {
    let values = crate::fields::interpolate(a, p.positions())?;
    Ok(values
        .iter()
        .zip(reference)
        .fold(0.0_f64, |acc, (v, r)| acc.max((v - r).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{random_band_limited, random_divergence_free, shift, Grid2D};
    use crate::noise_basis::make_fourier_basis;
    use crate::paths::{sample_brownian, TimeGrid};

    fn grid() -> Grid2D {
        Grid2D::new(64, 64).unwrap()
    }

    fn steady_series(u: &VectorField2D, n: usize) -> Vec<VectorField2D> {
        vec![u.clone(); n + 1]
    }

    #[test]
    fn particles_stay_put_without_flow() {
        let basis = NoiseBasis::empty(grid());
        let u = VectorField2D::zeros(grid());
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, 10).unwrap(), 0, 0);
        let p0 = ParticleSet::scatter(20, 4);
        let p = advance_particles(&p0, &steady_series(&u, 10), &basis, &path, 0, 10).unwrap();
        for (a, b) in p.positions().iter().zip(p0.positions()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uniform_flow_translates_particles() {
        let basis = NoiseBasis::empty(grid());
        let u = VectorField2D {
            x: ScalarField::constant(grid(), 1.0),
            y: ScalarField::zeros(grid()),
        };
        let n = 64;
        let path = sample_brownian(TimeGrid::new(0.0, std::f64::consts::PI, n).unwrap(), 0, 0);
        let p0 = ParticleSet::scatter(10, 9);
        let p = advance_particles_steady(&p0, &u, &basis, &path, 0, n).unwrap();
        for (a, b) in p.positions().iter().zip(p0.positions()) {
            let expected = (b[0] + std::f64::consts::PI).rem_euclid(TAU);
            assert!((a[0] - expected).abs() < 1e-10);
            assert!((a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_noise_displacement_matches_path_value() {
        let (cx, cy) = (0.3, 0.0);
        let basis = NoiseBasis::uniform(grid(), cx, cy);
        let u = VectorField2D::zeros(grid());
        let n = 200;
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, n).unwrap(), 1, 77);
        let p0 = ParticleSet::scatter(5, 3);
        let p = advance_particles_steady(&p0, &u, &basis, &path, 0, n).unwrap();
        let w_t = path.component(1)[n];
        for (a, b) in p.positions().iter().zip(p0.positions()) {
            let expected = (b[0] + cx * w_t).rem_euclid(TAU);
            assert!((a[0] - expected).abs() < 1e-12, "{} vs {expected}", a[0]);
            assert_eq!(a[1], b[1]);
        }
    }

    #[test]
    fn constant_scalar_is_invariant() {
        let basis = make_fourier_basis(grid(), 4, 2.0, 0.1, 2).unwrap();
        let u = random_divergence_free(grid(), 3, 0.4, 6);
        let a0 = ScalarField::constant(grid(), 2.5);
        let n = 50;
        let path = sample_brownian(TimeGrid::new(0.0, 0.05, n).unwrap(), 4, 8);
        let series = advect_scalar(&a0, &steady_series(&u, n), &basis, &path, 0, n).unwrap();
        assert!(series.last().unwrap().sub(&a0).linf() < 1e-13);
    }

    #[test]
    fn scalar_advection_commutes_with_constant_shifts() {
        let basis = make_fourier_basis(grid(), 2, 2.0, 0.1, 2).unwrap();
        let u = random_divergence_free(grid(), 3, 0.4, 61);
        let a0 = random_band_limited(grid(), 4, 1.0, 62);
        let mut a0_shifted = a0.clone();
        a0_shifted.add_constant(3.25);
        let n = 20;
        let path = sample_brownian(TimeGrid::new(0.0, 0.02, n).unwrap(), 2, 63);
        let series = steady_series(&u, n);
        let a = advect_scalar(&a0, &series, &basis, &path, 0, n).unwrap();
        let b = advect_scalar(&a0_shifted, &series, &basis, &path, 0, n).unwrap();
        let mut expected = a.last().unwrap().clone();
        expected.add_constant(3.25);
        assert!(b.last().unwrap().sub(&expected).linf() < 1e-12);
    }

    #[test]
    fn constant_noise_scalar_matches_exact_shift() {
        let (cx, cy) = (0.05, 0.02);
        let g = grid();
        let basis = NoiseBasis::uniform(g, cx, cy);
        let u = VectorField2D::zeros(g);
        let a0 = random_band_limited(g, 3, 1.0, 15);
        let n = 500;
        let path = sample_brownian(TimeGrid::new(0.0, 0.5, n).unwrap(), 1, 5);
        let a_t = advect_scalar_steady(&a0, &u, &basis, &path, 0, n).unwrap();
        let w_t = path.component(1)[n];
        let exact = shift(&a0, [cx * w_t, cy * w_t]);
        let err = a_t.sub(&exact).linf();
        assert!(err < 1e-5, "shift-oracle error {err}");
    }

    #[test]
    fn advected_scalar_respects_range_bound() {
        let basis = make_fourier_basis(grid(), 4, 2.0, 0.1, 2).unwrap();
        let u = random_divergence_free(grid(), 3, 0.4, 31);
        let a0 = random_band_limited(grid(), 3, 1.0, 32);
        let n = 500;
        let path = sample_brownian(TimeGrid::new(0.0, 0.5, n).unwrap(), 4, 33);
        let a_t = advect_scalar_steady(&a0, &u, &basis, &path, 0, n).unwrap();
        let tol = 1e-3;
        assert!(a_t.max() <= a0.max() + tol, "{} vs {}", a_t.max(), a0.max());
        assert!(a_t.min() >= a0.min() - tol, "{} vs {}", a_t.min(), a0.min());
    }

    #[test]
    fn unit_density_stays_unit_under_divergence_free_transport() {
        let basis = make_fourier_basis(grid(), 4, 2.0, 0.1, 2).unwrap();
        let u = random_divergence_free(grid(), 3, 0.4, 41);
        let d0 = ScalarField::constant(grid(), 1.0);
        let n = 200;
        let path = sample_brownian(TimeGrid::new(0.0, 0.2, n).unwrap(), 4, 42);
        let series = advect_density(&d0, &steady_series(&u, n), &basis, &path, 0, n).unwrap();
        let drift = series.last().unwrap().sub(&d0).linf();
        assert!(drift < 1e-10, "unit density drift {drift}");
    }

    #[test]
    fn density_mass_is_conserved_over_long_runs() {
        let basis = make_fourier_basis(grid(), 4, 2.0, 0.15, 2).unwrap();
        // compressible resolved flow: a gradient field
        let phi = random_band_limited(grid(), 3, 0.3, 51);
        let u = crate::fields::gradient(&phi);
        let mut d0 = random_band_limited(grid(), 3, 0.2, 52);
        d0.add_constant(1.0);
        let mass0 = d0.integral();
        let n = 1000;
        let path = sample_brownian(TimeGrid::new(0.0, 0.5, n).unwrap(), 4, 53);
        let series = advect_density(&d0, &steady_series(&u, n), &basis, &path, 0, n).unwrap();
        let mass_t = series.last().unwrap().integral();
        assert!(
            (mass_t - mass0).abs() < 1e-11 * mass0.abs(),
            "mass drift {}",
            (mass_t - mass0).abs() / mass0.abs()
        );
    }

    #[test]
    fn deterministic_density_matches_rk4_oracle() {
        // Independent time discretization (classical RK4 at a finer step)
        // of the same flux-form operator.
        let g = grid();
        let basis = NoiseBasis::empty(g);
        let phi = random_band_limited(g, 3, 0.3, 71);
        let u = crate::fields::gradient(&phi);
        let mut d0 = random_band_limited(g, 3, 0.2, 72);
        d0.add_constant(1.0);
        let n = 100;
        let path = sample_brownian(TimeGrid::new(0.0, 0.1, n).unwrap(), 0, 0);
        let heun =
            advect_density(&d0, &steady_series(&u, n), &basis, &path, 0, n).unwrap();
        let path_fine = sample_brownian(TimeGrid::new(0.0, 0.1, 2 * n).unwrap(), 0, 0);
        let heun_fine =
            advect_density(&d0, &steady_series(&u, 2 * n), &basis, &path_fine, 0, 2 * n).unwrap();

        // RK4 oracle at dt/4
        let dt = 0.1 / (4 * n) as f64;
        let mut a_hat = Spectrum::from_field(&d0);
        a_hat.dealias();
        let rhs = |s: &Spectrum| {
            let mut t =
                transport_increment_hat(s, &u, &basis, &[1.0], &Transport::Density);
            t.scale(1.0);
            t
        };
        for _ in 0..4 * n {
            let k1 = rhs(&a_hat);
            let mut s2 = a_hat.clone();
            s2.add_scaled(0.5 * dt, &k1);
            let k2 = rhs(&s2);
            let mut s3 = a_hat.clone();
            s3.add_scaled(0.5 * dt, &k2);
            let k3 = rhs(&s3);
            let mut s4 = a_hat.clone();
            s4.add_scaled(dt, &k3);
            let k4 = rhs(&s4);
            a_hat.add_scaled(dt / 6.0, &k1);
            a_hat.add_scaled(dt / 3.0, &k2);
            a_hat.add_scaled(dt / 3.0, &k3);
            a_hat.add_scaled(dt / 6.0, &k4);
        }
        let oracle = a_hat.to_field();
        let err = heun.last().unwrap().sub(&oracle).linf();
        let err_fine = heun_fine.last().unwrap().sub(&oracle).linf();
        assert!(err < 1e-4, "Heun vs RK4 oracle {err}");
        // halved dt: second-order convergence toward the oracle
        let ratio = err / err_fine;
        assert!((3.0..5.5).contains(&ratio), "convergence ratio {ratio}");
    }

    #[test]
    fn kiw_residual_is_zero_for_constant_fields() {
        let basis = make_fourier_basis(grid(), 2, 2.0, 0.1, 2).unwrap();
        let u = random_divergence_free(grid(), 3, 0.4, 81);
        let a0 = ScalarField::constant(grid(), 1.75);
        let n = 20;
        let path = sample_brownian(TimeGrid::new(0.0, 0.02, n).unwrap(), 2, 82);
        let series = steady_series(&u, n);
        let fields = advect_scalar(&a0, &series, &basis, &path, 0, n).unwrap();
        let particles =
            particle_trajectory(&ParticleSet::scatter(30, 83), &series, &basis, &path, 0, n)
                .unwrap();
        let r = kiw_residual(&fields, &particles).unwrap();
        assert!(r.iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn kiw_residual_small_for_pure_constant_noise() {
        let g = grid();
        let basis = NoiseBasis::uniform(g, 0.05, 0.02);
        let u = VectorField2D::zeros(g);
        let a0 = random_band_limited(g, 3, 1.0, 91);
        let n = 500;
        let path = sample_brownian(TimeGrid::new(0.0, 0.5, n).unwrap(), 1, 92);
        let a_t = advect_scalar_steady(&a0, &u, &basis, &path, 0, n).unwrap();
        let particles =
            advance_particles_steady(&ParticleSet::scatter(50, 93), &u, &basis, &path, 0, n)
                .unwrap();
        let r = kiw_final_residual(&a0, &a_t, &particles).unwrap();
        assert!(r < 1e-5, "shift-consistency residual {r}");
    }

    #[test]
    fn series_length_is_validated() {
        let basis = NoiseBasis::empty(grid());
        let u = VectorField2D::zeros(grid());
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, 10).unwrap(), 0, 0);
        let p = ParticleSet::scatter(3, 1);
        assert!(advance_particles(&p, &steady_series(&u, 7), &basis, &path, 0, 10).is_err());
    }
}
