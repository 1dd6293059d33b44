//! Cached 2D complex FFT built on rustfft.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = plans.lock().unwrap();
    guard
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
            planner.plan_fft(len, dir)
        })
        .clone()
}

fn transform_rows(data: &mut [Complex64], n_rows: usize, row_len: usize, forward: bool) {
    let fft = plan(row_len, forward);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for r in 0..n_rows {
        fft.process_with_scratch(&mut data[r * row_len..(r + 1) * row_len], &mut scratch);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// In-place 2D transform of an `nx * ny` array stored x-major
/// (`data[ix * ny + iy]`). Forward is unnormalized; inverse divides by
/// `nx * ny`.
pub(crate) fn fft2d(data: &mut [Complex64], nx: usize, ny: usize, forward: bool) {
    debug_assert_eq!(data.len(), nx * ny);
    transform_rows(data, nx, ny, forward);
    let mut tmp = vec![Complex64::default(); nx * ny];
    transpose(data, &mut tmp, nx, ny);
    transform_rows(&mut tmp, ny, nx, forward);
    transpose(&tmp, data, ny, nx);
    if !forward {
        let norm = 1.0 / (nx * ny) as f64;
        for v in data.iter_mut() {
            *v *= norm;
        }
    }
}
