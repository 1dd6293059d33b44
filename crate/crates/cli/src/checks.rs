//! Built-in invariant suite behind `saltlab check`: fast spot checks of
//! the identities every run relies on.

use saltlab::fields::{
    dealias, divergence, gradient, inverse_laplacian, laplacian, leray_project,
    random_band_limited, random_divergence_free, Grid2D, ScalarField,
};
use saltlab::noise_basis::{make_fourier_basis, transport_increment};
use saltlab::paths::{sample_brownian, TimeGrid};
use saltlab::salt_euler::{
    step_velocity_with, step_vorticity, taylor_green_vorticity, VelocityOptions, VelocityState,
    VorticityState,
};
use saltlab::salt_rsw::{rsw_diagnostics, step_rsw, RswParams, RswState};
use saltlab::stratonovich::{covariation, ito_integral, strat_integral, GridSeries};

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, value: f64, bound: f64) -> Check {
    Check { name, ok: value < bound, detail: format!("{value:.3e} (bound {bound:.1e})") }
}

fn grid() -> Grid2D {
    Grid2D::new(32, 32).unwrap()
}

fn spectral_identities() -> Vec<Check> {
    let g = grid();
    let f = ScalarField::from_fn(g, |x, y| (2.0 * x).sin() * y.cos());
    let lap = laplacian(&f);
    let mut expect = f.clone();
    expect.scale(-5.0);
    let e1 = lap.sub(&expect).linf();

    let r = random_band_limited(g, 9, 1.0, 3);
    let round = laplacian(&inverse_laplacian(&r));
    let mut centered = r.clone();
    centered.add_constant(-r.mean());
    let e2 = round.sub(&centered).rms();

    let grad = gradient(&random_band_limited(g, 8, 1.0, 4));
    let killed = leray_project(&grad);
    let e3 = killed.x.linf().max(killed.y.linf());

    let v = random_divergence_free(g, 6, 1.0, 5);
    let e4 = divergence(&leray_project(&v)).rms();

    let nyq = ScalarField::from_fn(g, |x, _| (16.0 * x).cos());
    let e5 = dealias(&nyq).linf();

    vec![
        check("laplacian eigenfunction", e1, 1e-11),
        check("inverse laplacian round trip", e2, 1e-11),
        check("leray kills gradients", e3, 1e-11),
        check("leray output divergence", e4, 1e-11),
        check("dealias removes nyquist", e5, 1e-12),
    ]
}

fn stratonovich_identities() -> Vec<Check> {
    let path = sample_brownian(TimeGrid::new(0.0, 1.0, 2000).unwrap(), 2, 9);
    let w = path.component(1).to_vec();
    let s = strat_integral(&GridSeries(&w), &path, 1, 0.0, 1.0).unwrap();
    let e1 = (s - 0.5 * w[2000] * w[2000]).abs();

    let f: Vec<f64> = w.iter().map(|v| v * v).collect();
    let sv = strat_integral(&GridSeries(&f), &path, 2, 0.0, 1.0).unwrap();
    let iv = ito_integral(&GridSeries(&f), &path, 2, 0.0, 1.0).unwrap();
    let cv = covariation(&f, path.component(2), &path.grid, 0.0, 1.0).unwrap();
    let e2 = (sv - iv - 0.5 * cv).abs();

    vec![
        check("stratonovich telescoping W o dW", e1, 1e-12),
        check("ito + covariation/2 bridge", e2, 1e-12),
    ]
}

fn noise_checks() -> Vec<Check> {
    let basis = make_fourier_basis(grid(), 8, 2.0, 0.1, 4).unwrap();
    let worst = (0..basis.len())
        .map(|k| divergence(basis.xi(k)).rms())
        .fold(0.0, f64::max);
    let inc = transport_increment(&basis, &[0.1, -0.2, 0.3, 0.05, -0.4, 0.2, 0.1, -0.1]).unwrap();
    vec![
        check("noise modes divergence-free", worst, 1e-12),
        check("transport increment divergence-free", divergence(&inc).rms(), 1e-12),
    ]
}

fn solver_checks() -> Vec<Check> {
    let g = grid();
    let empty = saltlab::noise_basis::NoiseBasis::empty(g);
    let omega0 = taylor_green_vorticity(g);
    let mut state = VorticityState::new(omega0.clone());
    for _ in 0..10 {
        state = step_vorticity(&state, &empty, &[1e-3]).unwrap();
    }
    let e1 = state.omega.sub(&omega0).linf();

    let basis = make_fourier_basis(g, 3, 2.0, 0.2, 2).unwrap();
    let u0 = random_divergence_free(g, 4, 0.5, 11);
    let path = sample_brownian(TimeGrid::new(0.0, 0.01, 10).unwrap(), 3, 12);
    let mut vstate = VelocityState::new(u0);
    let mut projected: f64 = 0.0;
    for n in 0..10 {
        let (next, report) = step_velocity_with(
            &vstate,
            &basis,
            &path.increments(n),
            VelocityOptions { project_noise_channels: true, compute_pressure: false },
        )
        .unwrap();
        vstate = next;
        projected = projected.max(report.channel_div_rms.iter().cloned().fold(0.0, f64::max));
    }
    let (_, report) = step_velocity_with(
        &vstate,
        &basis,
        &path.increments(0),
        VelocityOptions { project_noise_channels: false, compute_pressure: false },
    )
    .unwrap();
    let unprojected = report.channel_div_rms[1..].iter().cloned().fold(0.0, f64::max);

    let params = RswParams::constant_f(g, 0.1, 1.0, 1.0).unwrap();
    let rsw_basis = make_fourier_basis(g, 2, 2.0, 0.05, 2).unwrap();
    let u0 = random_divergence_free(g, 3, 0.2, 21);
    let mut eta0 = random_band_limited(g, 3, 0.05, 22);
    eta0.add_constant(1.0);
    let mut rsw = RswState::new(u0, eta0).unwrap();
    let mass0 = rsw_diagnostics(&rsw, &params).mass;
    let rsw_path = sample_brownian(TimeGrid::new(0.0, 0.1, 100).unwrap(), 2, 23);
    for n in 0..100 {
        rsw = step_rsw(&rsw, &params, &rsw_basis, &rsw_path.increments(n)).unwrap();
    }
    let mass_drift = (rsw_diagnostics(&rsw, &params).mass - mass0).abs() / mass0;

    vec![
        check("taylor-green steadiness (10 steps)", e1, 1e-10),
        check("velocity channels projected", projected, 1e-10),
        Check {
            name: "suppressed stochastic pressure breaks divergence",
            ok: unprojected > 1e-3,
            detail: format!("{unprojected:.3e} (must exceed 1e-3)"),
        },
        check("rsw mass conservation (100 steps)", mass_drift, 1e-11),
    ]
}

fn reproducibility_check() -> Vec<Check> {
    let g = grid();
    let basis = make_fourier_basis(g, 2, 2.0, 0.1, 2).unwrap();
    let run = || {
        let path = sample_brownian(TimeGrid::new(0.0, 0.02, 20).unwrap(), 2, 31);
        let mut s = VorticityState::new(random_band_limited(g, 4, 1.0, 32));
        for n in 0..20 {
            s = step_vorticity(&s, &basis, &path.increments(n)).unwrap();
        }
        s.omega
    };
    let a = run();
    let b = run();
    vec![Check {
        name: "bitwise reproducibility",
        ok: a.data() == b.data(),
        detail: if a.data() == b.data() { "identical".into() } else { "MISMATCH".into() },
    }]
}

/// Run all built-in checks, printing one line per check. Returns true when
/// everything passed.
pub fn run_checks() -> bool {
    let mut all = Vec::new();
    all.extend(spectral_identities());
    all.extend(stratonovich_identities());
    all.extend(noise_checks());
    all.extend(solver_checks());
    all.extend(reproducibility_check());
    let mut ok = true;
    for c in &all {
        println!("{} {:<48} {}", if c.ok { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.ok;
    }
    ok
}

#[cfg(test)]
mod tests {
    #[test]
    fn builtin_checks_pass() {
        assert!(super::run_checks());
    }
}
