//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured value (run with `--nocapture` to see them all).
//!
//! Every tolerance is fixed here, in code. Runs in a few minutes on a
//! laptop; the heavy refinement criteria parallelize over seeds.

use rayon::prelude::*;
use saltlab::fields::{divergence, random_divergence_free, Grid2D, ScalarField, Spectrum};
use saltlab::noise_basis::{make_fourier_basis, NoiseBasis};
use saltlab::paths::{sample_brownian, TimeGrid};
use saltlab::salt_euler::{
    pressure_components, step_vorticity, taylor_green_velocity, taylor_green_vorticity,
    VelocityOptions, VorticityState,
};
use saltlab::salt_rsw::{step_rsw, RswParams, RswState};
use saltlab::stratonovich::{covariation, ito_integral, strat_integral, GridSeries};
use saltlab_cli::config::parse_config;
use saltlab_cli::experiments::{self, NoiseParams};
use saltlab_cli::runner;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn pass(criterion: &str, detail: String) {
    println!("criterion {criterion}: PASS ({detail})");
}

#[test]
fn criterion_01_deterministic_reduction() {
    // K = 0 Taylor-Green at 64^2, dt = 1e-3, T = 1: steady to 1e-6, and
    // the stochastic stepper with all-zero noise increments is bit-identical
    // to the deterministic stepper.
    let grid = Grid2D::new(64, 64).unwrap();
    let omega0 = taylor_green_vorticity(grid);
    let empty = NoiseBasis::empty(grid);
    let noisy = make_fourier_basis(grid, 4, 2.0, 0.1, 4).unwrap();
    let mut det = VorticityState::new(omega0.clone());
    let mut stoch = VorticityState::new(omega0.clone());
    let zero_ds = [1e-3, 0.0, 0.0, 0.0, 0.0];
    for _ in 0..1000 {
        det = step_vorticity(&det, &empty, &[1e-3]).unwrap();
        stoch = step_vorticity(&stoch, &noisy, &zero_ds).unwrap();
    }
    let drift = det.omega.sub(&omega0).linf();
    assert!(drift < 1e-6, "Taylor-Green drift {drift}");
    assert_eq!(det.omega.data(), stoch.omega.data(), "steppers are not bit-identical");
    pass("01 deterministic reduction", format!("drift {drift:.3e}, bit-identical"));
}

#[test]
fn criterion_02_stratonovich_identity_suite() {
    // (a) discrete int W o dW = W_T^2 / 2 at machine precision per path
    let mut worst = 0.0_f64;
    for seed in 0..5 {
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, 1000).unwrap(), 1, seed);
        let w = path.component(1).to_vec();
        let s = strat_integral(&GridSeries(&w), &path, 1, 0.0, 1.0).unwrap();
        let exact = 0.5 * w[1000] * w[1000];
        worst = worst.max((s - exact).abs() / exact.abs().max(1.0));
    }
    assert!(worst < 1e-12, "telescoping error {worst}");

    // (b) Ito + covariation/2 bridge identity at machine precision
    let mut bridge = 0.0_f64;
    for seed in 0..5 {
        let path = sample_brownian(TimeGrid::new(0.0, 1.0, 1000).unwrap(), 2, seed);
        let f: Vec<f64> = path.component(1).iter().map(|v| v * v).collect();
        let s = strat_integral(&GridSeries(&f), &path, 2, 0.0, 1.0).unwrap();
        let i = ito_integral(&GridSeries(&f), &path, 2, 0.0, 1.0).unwrap();
        let c = covariation(&f, path.component(2), &path.grid, 0.0, 1.0).unwrap();
        bridge = bridge.max((s - i - 0.5 * c).abs());
    }
    assert!(bridge < 1e-13, "bridge identity error {bridge}");

    // (c) Stratonovich GBM strong order >= 0.9 across dt in {2^-6 .. 2^-12}
    // on bridge-refined paths
    let points = experiments::gbm_strong_errors(64, 7, 32, 9000, 1.0).unwrap();
    let slope = experiments::fitted_order(&points);
    assert!(slope >= 0.9, "GBM strong-error slope {slope}");
    pass(
        "02 stratonovich identities",
        format!("telescope {worst:.2e}, bridge {bridge:.2e}, GBM slope {slope:.3}"),
    );
}

#[test]
fn criterion_03_fundamental_lemma_harness() {
    // F = W against its own component, dt = 1e-4, ramp widths 2^-m (b-a):
    // e_8 < e_1 / 10 required on >= 95 of 100 seeds.
    let sequences = experiments::lemma_error_sequences(100, 10_000, 0.25, 0.75, 8).unwrap();
    let success = experiments::lemma_success_count(&sequences);
    let med: Vec<f64> = (0..8)
        .map(|m| median(sequences.iter().map(|e| e[m]).collect()))
        .collect();
    println!(
        "criterion 03 fundamental lemma: {success}/100 seeds with e_8 < e_1/10; \
         median errors {:?}",
        med.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
    );
    assert!(
        success >= 95,
        "only {success}/100 seeds satisfied e_8 < e_1/10; the pathwise ramp error \
         carries an O(sqrt(width)) martingale fluctuation, so the per-seed ratio \
         e_8/e_1 is a heavy-tailed variable with median ~0.096 against the 0.1 \
         threshold (medians do decay at the sqrt rate: {med:?})"
    );
    pass("03 fundamental lemma harness", format!("{success}/100 seeds"));
}

#[test]
fn criterion_04_doob_meyer_channel_separation() {
    // velocity form, 64^2, K = 4, T = 0.25: every per-channel
    // post-projection tendency divergence-free to 1e-10 at every step;
    // suppressing the stochastic pressure channels breaks this by > 1e-3.
    let grid = Grid2D::new(64, 64).unwrap();
    let basis = make_fourier_basis(grid, 4, 2.0, 0.1, 4).unwrap();
    let u0 = random_divergence_free(grid, 4, 0.5, 4001);
    let path = sample_brownian(TimeGrid::new(0.0, 0.25, 250).unwrap(), 4, 4002);
    let opts = VelocityOptions { project_noise_channels: true, compute_pressure: false };
    let (_, divs) = experiments::velocity_run(u0.clone(), &basis, &path, 0, 250, opts).unwrap();
    let mut worst = 0.0_f64;
    for (step, channels) in divs.iter().enumerate() {
        for (k, &d) in channels.iter().enumerate() {
            assert!(d < 1e-10, "channel {k} divergence {d} at step {step}");
            worst = worst.max(d);
        }
    }

    let opts_off = VelocityOptions { project_noise_channels: false, compute_pressure: false };
    let (_, divs_off) = experiments::velocity_run(u0, &basis, &path, 0, 250, opts_off).unwrap();
    let mut per_channel_max = vec![0.0_f64; 5];
    for channels in &divs_off {
        for (k, &d) in channels.iter().enumerate() {
            per_channel_max[k] = per_channel_max[k].max(d);
        }
    }
    for (k, &d) in per_channel_max.iter().enumerate().skip(1) {
        assert!(d > 1e-3, "suppressed channel {k} divergence only {d}");
    }
    pass(
        "04 Doob-Meyer channel separation",
        format!(
            "projected max {worst:.2e}; suppressed channels reach {:.2e}",
            per_channel_max[1..].iter().cloned().fold(0.0, f64::max)
        ),
    );
}

/// Five-point finite-difference Poisson solve (independent oracle): the FD
/// operator is diagonal in Fourier space with eigenvalues
/// `(2 cos(2 pi p / n) - 2) / h^2` per direction.
fn fd_poisson(rhs: &ScalarField) -> ScalarField {
    let grid = rhs.grid;
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut hat = Spectrum::from_field(rhs);
    for m in 0..nx {
        let lx = (2.0 * (std::f64::consts::TAU * m as f64 / nx as f64).cos() - 2.0) / (hx * hx);
        for l in 0..ny {
            let ly =
                (2.0 * (std::f64::consts::TAU * l as f64 / ny as f64).cos() - 2.0) / (hy * hy);
            let lambda = lx + ly;
            let c = &mut hat.data_mut()[m * ny + l];
            *c = if lambda == 0.0 { Default::default() } else { *c / lambda };
        }
    }
    hat.to_field()
}

fn subsample(fine: &ScalarField, coarse_grid: Grid2D) -> ScalarField {
    let stride = fine.grid.nx() / coarse_grid.nx();
    ScalarField::from_data(
        coarse_grid,
        (0..coarse_grid.nx())
            .flat_map(|ix| (0..coarse_grid.ny()).map(move |iy| (ix, iy)))
            .map(|(ix, iy)| fine.get(ix * stride, iy * stride))
            .collect(),
    )
    .unwrap()
}

#[test]
fn criterion_05_pressure_spde_consistency() {
    // P0 on Taylor-Green against a Richardson-extrapolated five-point FD
    // Poisson oracle with the analytic right-hand side; relative L2 < 1e-6.
    let grid = Grid2D::new(64, 64).unwrap();
    let u = taylor_green_velocity(grid);
    let (p0, _) = pressure_components(&u, &NoiseBasis::empty(grid));

    // analytic rhs of the pressure Poisson equation for Taylor-Green:
    // -sum_ij du_i/dx_j du_j/dx_i = -(cos 2x + cos 2y)
    let rhs = |g: Grid2D| {
        ScalarField::from_fn(g, |x, y| -((2.0 * x).cos() + (2.0 * y).cos()))
    };
    let coarse = fd_poisson(&rhs(Grid2D::new(512, 512).unwrap()));
    let fine = fd_poisson(&rhs(Grid2D::new(1024, 1024).unwrap()));
    let mut oracle = subsample(&fine, grid);
    oracle.scale(4.0 / 3.0);
    oracle.add_scaled(-1.0 / 3.0, &subsample(&coarse, grid));
    oracle.add_constant(-oracle.mean());

    let rel = p0.sub(&oracle).l2_norm() / oracle.l2_norm();
    assert!(rel < 1e-6, "P0 vs FD oracle relative error {rel}");

    // constant-noise channel: Pk identically zero
    let uniform = NoiseBasis::uniform(grid, 0.3, -0.2);
    let smooth = random_divergence_free(grid, 5, 0.7, 5005);
    let (_, pk) = pressure_components(&smooth, &uniform);
    let pk_max = pk[0].linf();
    assert!(pk_max < 1e-12, "constant-mode Pk = {pk_max}");
    pass("05 pressure SPDE consistency", format!("FD rel err {rel:.2e}, Pk {pk_max:.2e}"));
}

#[test]
fn criterion_06_translation_equivariance() {
    // single constant noise mode, 64^2, dt = 1e-3, T = 0.5: stochastic
    // solution equals the shifted deterministic one; median max error over
    // 10 seeds < 1e-4.
    let errors: Vec<f64> = (1u64..=10)
        .into_par_iter()
        .map(|seed| {
            experiments::translation_equivariance_error(seed, 64, 500, 0.5, [0.1, 0.05]).unwrap()
        })
        .collect();
    let med = median(errors.clone());
    assert!(med < 1e-4, "median translation error {med} (all: {errors:?})");
    pass("06 translation equivariance", format!("median max error {med:.3e}"));
}

#[test]
fn criterion_07_pathwise_casimir_conservation() {
    // vorticity-form, K = 4, 64^2, dt = 5e-4, T = 0.5: relative enstrophy
    // drift < 1e-3, halving (median ratio >= 1.8) under simultaneous
    // (dt/2, N x 2) refinement on the same bridge-refined path; 10 seeds.
    let noise = NoiseParams::standard();
    let rows: Vec<(f64, f64)> = (1u64..=10)
        .into_par_iter()
        .map(|seed| {
            let d0 = experiments::enstrophy_drift(seed, 0, 64, 1000, 0.5, &noise).unwrap();
            let d1 = experiments::enstrophy_drift(seed, 1, 64, 1000, 0.5, &noise).unwrap();
            (d0, d1)
        })
        .collect();
    let max_drift = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    assert!(max_drift < 1e-3, "coarse enstrophy drift {max_drift}");
    let ratio = median(rows.iter().map(|r| r.0 / r.1).collect());
    assert!(ratio >= 1.8, "median refinement ratio {ratio} (rows: {rows:?})");
    pass(
        "07 pathwise Casimir conservation",
        format!("max drift {max_drift:.3e}, median ratio {ratio:.2}"),
    );
}

#[test]
fn criterion_08_dual_formulation_agreement() {
    // vorticity vs velocity forms on identical paths, random smooth data,
    // K = 2, 64^2, dt = 5e-4, T = 0.25: relative L2 discrepancy < 1e-3.
    let worst = (1u64..=2)
        .map(|seed| experiments::dual_formulation_discrepancy(seed, 64, 500, 0.25).unwrap())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "dual-formulation discrepancy {worst}");
    pass("08 dual formulation agreement", format!("max rel L2 discrepancy {worst:.3e}"));
}

#[test]
fn criterion_09_kiw_invariance() {
    // r(T) < 1e-3 at 64^2, dt = 1e-3, 100 particles; halves under
    // refinement with median ratio >= 1.8 over 10 seeds.
    let noise = NoiseParams::standard();
    let rows: Vec<(f64, f64)> = (1u64..=10)
        .into_par_iter()
        .map(|seed| {
            let r0 =
                experiments::kiw_residual_at_level(seed, 0, 64, 500, 0.5, 100, &noise).unwrap();
            let r1 =
                experiments::kiw_residual_at_level(seed, 1, 64, 500, 0.5, 100, &noise).unwrap();
            (r0, r1)
        })
        .collect();
    let max_r = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    assert!(max_r < 1e-3, "KIW residual {max_r}");
    let ratio = median(rows.iter().map(|r| r.0 / r.1).collect());
    assert!(ratio >= 1.8, "median refinement ratio {ratio} (rows: {rows:?})");
    pass("09 KIW invariance", format!("max r(T) {max_r:.3e}, median ratio {ratio:.2}"));
}

#[test]
fn criterion_10_rsw_conservation() {
    // mass drift < 1e-10 over 1000 steps; PV-along-particles residual
    // converges under refinement (median ratio >= 1.5); K = 0 run
    // bit-matches the deterministic reference.
    let noise = NoiseParams { k: 2, gamma: 2.0, c: 0.05, kmax: 2 };
    let (mass_drift, _) =
        experiments::rsw_mass_and_pv_residual(77, 0, 64, 1000, 1.0, 10, &noise).unwrap();
    assert!(mass_drift < 1e-10, "mass drift {mass_drift}");

    let rows: Vec<(f64, f64)> = (1u64..=4)
        .into_par_iter()
        .map(|seed| {
            let (_, p0) =
                experiments::rsw_mass_and_pv_residual(seed, 0, 64, 250, 0.25, 40, &noise).unwrap();
            let (_, p1) =
                experiments::rsw_mass_and_pv_residual(seed, 1, 64, 250, 0.25, 40, &noise).unwrap();
            (p0, p1)
        })
        .collect();
    let ratio = median(rows.iter().map(|r| r.0 / r.1).collect());
    assert!(ratio >= 1.5, "PV refinement ratio {ratio} (rows: {rows:?})");

    // deterministic reduction, bit-exact
    let grid = Grid2D::new(64, 64).unwrap();
    let params = RswParams::constant_f(grid, 0.1, 1.0, 1.0).unwrap();
    let u0 = random_divergence_free(grid, 3, 0.2, 1010);
    let mut eta0 = saltlab::fields::random_band_limited(grid, 3, 0.05, 1011);
    eta0.add_constant(1.0);
    let empty = NoiseBasis::empty(grid);
    let noisy = make_fourier_basis(grid, 2, 2.0, 0.05, 2).unwrap();
    let mut a = RswState::new(u0.clone(), eta0.clone()).unwrap();
    let mut b = RswState::new(u0, eta0).unwrap();
    for _ in 0..100 {
        a = step_rsw(&a, &params, &empty, &[1e-3]).unwrap();
        b = step_rsw(&b, &params, &noisy, &[1e-3, 0.0, 0.0]).unwrap();
    }
    assert_eq!(a.u.x.data(), b.u.x.data());
    assert_eq!(a.eta.data(), b.eta.data());
    pass(
        "10 RSW conservation",
        format!("mass drift {mass_drift:.2e}, PV ratio {ratio:.2}, bit-exact reduction"),
    );
}

#[test]
fn criterion_11_reproducibility() {
    // identical (config, seed) produce bit-identical diagnostics CSVs
    for mode in ["euler-vorticity", "euler-velocity", "rsw"] {
        let text = format!(
            "mode = \"{mode}\"\nnx = 32\nny = 32\ndt = 1e-3\nt_end = 0.03\nseed = 11\n\
             [ic]\nkind = \"random\"\nkmax = 3\namplitude = 1.0\n\
             [noise]\nk = 2\ngamma = 2.0\nc = 0.1\nkmax = 2\n"
        );
        let config = parse_config(&text).unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        runner::run(&config, Some(dir_a.path())).unwrap();
        runner::run(&config, Some(dir_b.path())).unwrap();
        let a = std::fs::read(dir_a.path().join("diagnostics.csv")).unwrap();
        let b = std::fs::read(dir_b.path().join("diagnostics.csv")).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "diagnostics differ for mode {mode}");
    }
    // the standard random initial condition is itself reproducible
    let grid = Grid2D::new(32, 32).unwrap();
    let u = runner::standard_velocity(grid, 3);
    let v = runner::standard_velocity(grid, 3);
    assert_eq!(u.x.data(), v.x.data());
    assert!(divergence(&u).rms() < 1e-10);
    pass("11 reproducibility", "bit-identical diagnostics for 3 modes".to_string());
}
