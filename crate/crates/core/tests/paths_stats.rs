//! Monte-Carlo statistics of the driving-path samplers against analytic
//! moments.

use saltlab::paths::{refine, sample_brownian, sample_ou, TimeGrid};

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

#[test]
fn brownian_terminal_variance() {
    let grid = TimeGrid::new(0.0, 1.0, 8).unwrap();
    let n_members = 100_000u64;
    let finals: Vec<f64> = (0..n_members)
        .map(|m| {
            let path = sample_brownian(grid, 1, m);
            *path.component(1).last().unwrap()
        })
        .collect();
    let v = variance(&finals);
    assert!((v - 1.0).abs() < 0.02, "Var(W(1)) = {v}");
}

#[test]
fn brownian_increments_have_zero_mean_and_dt_variance() {
    let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
    let dt = grid.dt();
    let n_members = 20_000u64;
    for step in 0..4 {
        let incs: Vec<f64> = (0..n_members)
            .map(|m| {
                let path = sample_brownian(grid, 2, 5_000 + m);
                path.increment(2, step)
            })
            .collect();
        let mean = incs.iter().sum::<f64>() / n_members as f64;
        let var = variance(&incs);
        // 3-sigma Monte-Carlo bounds
        let mean_tol = 3.0 * (dt / n_members as f64).sqrt();
        let var_tol = 3.0 * dt * (2.0 / n_members as f64).sqrt();
        assert!(mean.abs() < mean_tol, "step {step}: mean {mean} vs tol {mean_tol}");
        assert!((var - dt).abs() < var_tol, "step {step}: var {var} vs dt {dt}");
    }
}

#[test]
fn ou_variance_matches_exact_law() {
    // dX = -X dt + dW from X(0) = 0: Var X(T) = (1 - exp(-2T)) / 2,
    // which sits inside the stationary-value band 1/2 +- 0.02 at T = 2.
    let grid = TimeGrid::new(0.0, 2.0, 16).unwrap();
    let n_members = 100_000u64;
    let finals: Vec<f64> = (0..n_members)
        .map(|m| {
            let path = sample_ou(grid, 1, 1.0, 1.0, m).unwrap();
            *path.component(1).last().unwrap()
        })
        .collect();
    let v = variance(&finals);
    let exact = 0.5 * (1.0 - (-4.0f64).exp());
    assert!((v - exact).abs() < 3.0 * exact * (2.0 / n_members as f64).sqrt() + 1e-3,
        "Var(X(2)) = {v} vs exact {exact}");
    assert!((v - 0.5).abs() < 0.02, "Var(X(2)) = {v} outside stationary band");
}

#[test]
fn ou_with_zero_theta_matches_brownian_marginals() {
    let grid = TimeGrid::new(0.0, 1.0, 8).unwrap();
    let n_members = 50_000u64;
    let finals: Vec<f64> = (0..n_members)
        .map(|m| {
            let path = sample_ou(grid, 1, 0.0, 1.0, 90_000 + m).unwrap();
            *path.component(1).last().unwrap()
        })
        .collect();
    let v = variance(&finals);
    assert!((v - 1.0).abs() < 0.03, "Var = {v}");
}

#[test]
fn bridge_increment_variance_is_half_dt() {
    // One coarse unit step refined by 2: the first fine increment has
    // unconditional variance dt/2.
    let grid = TimeGrid::new(0.0, 1.0, 1).unwrap();
    let n_members = 100_000u64;
    let incs: Vec<f64> = (0..n_members)
        .map(|m| {
            let coarse = sample_brownian(grid, 1, m);
            let fine = refine(&coarse, 2, m ^ 0xdead_beef).unwrap();
            fine.increment(1, 0)
        })
        .collect();
    let v = variance(&incs);
    assert!((v - 0.5).abs() < 0.02 * 0.5, "bridge increment variance {v}");
}
