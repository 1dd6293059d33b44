//! Sampled realizations of the driving semimartingale `S_t = (t, W^1, ..., W^K)`.
//!
//! Component 0 is the time variable itself and carries all finite variation;
//! components `1..=K` are continuous martingales (Brownian by default, or
//! exactly-discretized Ornstein-Uhlenbeck paths that are *classified* as
//! martingale components because they multiply Stratonovich increments).
//!
//! Randomness contract: every normal draw is a pure function of
//! `(seed, process tag, component, step)`, so enlarging `K` or re-sampling
//! with the same seed leaves existing components bit-identical.

use crate::error::{Error, Result};
use crate::rng::NormalStream;
use std::io::{Read, Write};
use std::path::Path;

/// Uniform time grid on `[t0, t1]` with `n_steps` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(Error::invalid("time grid endpoints must be finite"));
        }
        if t1 <= t0 {
            return Err(Error::invalid(format!(
                "time grid requires t1 > t0 (got t0={t0}, t1={t1})"
            )));
        }
        if n_steps == 0 {
            return Err(Error::invalid("time grid requires n_steps >= 1"));
        }
        Ok(TimeGrid { t0, t1, n_steps })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps as f64
    }

    /// Node time `t0 + n*dt`, the exact expression stored in component 0.
    pub fn node(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    /// Map a time to its grid-node index; the time must sit on a node.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        let dt = self.dt();
        let raw = (t - self.t0) / dt;
        let n = raw.round();
        if n < 0.0 || n > self.n_steps as f64 || (t - self.node(n as usize)).abs() > 1e-9 * dt {
            return Err(Error::invalid(format!(
                "time {t} is not a node of the grid [{}, {}] / {}",
                self.t0, self.t1, self.n_steps
            )));
        }
        Ok(n as usize)
    }
}

/// Integration role of a path component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    /// Carries the `dt` channel; by convention only component 0.
    FiniteVariation,
    /// Multiplies Stratonovich noise increments.
    Martingale,
}

/// Domain separator so that distinct processes draw from distinct streams
/// even under the same seed.
#[derive(Debug, Clone, Copy)]
enum ProcessTag {
    Brownian = 1,
    OrnsteinUhlenbeck = 2,
    Bridge = 3,
}

fn stream(seed: u64, tag: ProcessTag, component: usize) -> NormalStream {
    NormalStream::new(seed, tag as u64, component as u64)
}

/// A sampled realization of the driving semimartingale on a uniform grid.
///
/// `values[j][n]` is component `j` at node `n`; `values[0]` is exactly the
/// grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    pub grid: TimeGrid,
    pub values: Vec<Vec<f64>>,
    pub kinds: Vec<ComponentKind>,
    pub seed: u64,
}

impl DrivingPath {
    /// Number of martingale components `K`.
    pub fn n_martingale(&self) -> usize {
        self.values.len() - 1
    }

    pub fn n_components(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    /// Increment of component `j` over step `n` (from node `n` to `n+1`).
    pub fn increment(&self, j: usize, n: usize) -> f64 {
        self.values[j][n + 1] - self.values[j][n]
    }

    /// All `K + 1` increments over step `n`; entry 0 is `dt`.
    pub fn increments(&self, n: usize) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.increment(j, n)).collect()
    }

    fn time_component(grid: &TimeGrid) -> Vec<f64> {
        (0..grid.n_nodes()).map(|n| grid.node(n)).collect()
    }
}

/// Sample `K` independent standard Brownian components on `grid`.
pub fn sample_brownian(grid: TimeGrid, k: usize, seed: u64) -> DrivingPath {
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(k + 1);
    let mut kinds = Vec::with_capacity(k + 1);
    values.push(DrivingPath::time_component(&grid));
    kinds.push(ComponentKind::FiniteVariation);
    for j in 1..=k {
        let mut draws = stream(seed, ProcessTag::Brownian, j);
        let mut w = Vec::with_capacity(grid.n_nodes());
        w.push(0.0);
        let mut x = 0.0;
        for _ in 0..grid.n_steps {
            x += sqrt_dt * draws.next_normal();
            w.push(x);
        }
        values.push(w);
        kinds.push(ComponentKind::Martingale);
    }
    DrivingPath { grid, values, kinds, seed }
}

/// Sample `K` independent Ornstein-Uhlenbeck components
/// `dX = -theta X dt + sigma dW`, started at 0, by exact discretization.
///
/// `theta = 0` degenerates to Brownian motion scaled by `sigma` (distinct
/// draw stream from [`sample_brownian`], so equality is in law only).
pub fn sample_ou(grid: TimeGrid, k: usize, theta: f64, sigma: f64, seed: u64) -> Result<DrivingPath> {
    if theta < 0.0 || !theta.is_finite() {
        return Err(Error::invalid(format!("theta must be >= 0 (got {theta})")));
    }
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be >= 0 (got {sigma})")));
    }
    let dt = grid.dt();
    let decay = (-theta * dt).exp();
    let scale = if theta > 0.0 {
        sigma * ((1.0 - (-2.0 * theta * dt).exp()) / (2.0 * theta)).sqrt()
    } else {
        sigma * dt.sqrt()
    };
    let mut values = Vec::with_capacity(k + 1);
    let mut kinds = Vec::with_capacity(k + 1);
    values.push(DrivingPath::time_component(&grid));
    kinds.push(ComponentKind::FiniteVariation);
    for j in 1..=k {
        let mut draws = stream(seed, ProcessTag::OrnsteinUhlenbeck, j);
        let mut w = Vec::with_capacity(grid.n_nodes());
        let mut x = 0.0;
        w.push(x);
        for _ in 0..grid.n_steps {
            x = x * decay + scale * draws.next_normal();
            w.push(x);
        }
        values.push(w);
        kinds.push(ComponentKind::Martingale);
    }
    Ok(DrivingPath { grid, values, kinds, seed })
}

/// Refine a path by an integer factor, filling martingale components with a
/// Brownian bridge conditioned on the coarse values. Coarse nodes are
/// preserved bit-exactly; component 0 is re-built exactly as time.
pub fn refine(path: &DrivingPath, factor: usize, seed: u64) -> Result<DrivingPath> {
    if factor < 2 {
        return Err(Error::invalid(format!("refine factor must be >= 2 (got {factor})")));
    }
    let coarse = &path.grid;
    let fine = TimeGrid::new(coarse.t0, coarse.t1, coarse.n_steps * factor)?;
    let dt_f = fine.dt();
    let mut values = Vec::with_capacity(path.n_components());
    values.push(DrivingPath::time_component(&fine));
    for j in 1..path.n_components() {
        let mut draws = stream(seed, ProcessTag::Bridge, j);
        let mut w = vec![0.0; fine.n_nodes()];
        for n in 0..coarse.n_steps {
            let y = path.values[j][n + 1];
            w[n * factor] = path.values[j][n];
            let mut x = path.values[j][n];
            for i in 1..factor {
                let remaining = (factor - i + 1) as f64 * dt_f;
                let mean = x + (y - x) * dt_f / remaining;
                let var = dt_f * (remaining - dt_f) / remaining;
                x = mean + var.sqrt() * draws.next_normal();
                w[n * factor + i] = x;
            }
        }
        w[fine.n_steps] = path.values[j][coarse.n_steps];
        values.push(w);
    }
    Ok(DrivingPath {
        grid: fine,
        values,
        kinds: path.kinds.clone(),
        seed: path.seed,
    })
}

const SMDP_MAGIC: &[u8; 4] = b"SMDP";
const SMDP_VERSION: u32 = 1;

/// Dump a path to the little-endian "SMDP" binary format.
pub fn write_smdp(path: &DrivingPath, file: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(file)?);
    out.write_all(SMDP_MAGIC)?;
    out.write_all(&SMDP_VERSION.to_le_bytes())?;
    out.write_all(&(path.grid.n_steps as u64).to_le_bytes())?;
    out.write_all(&(path.n_components() as u32).to_le_bytes())?;
    for component in &path.values {
        for v in component {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read a path back from the "SMDP" format. The stored data carries no seed,
/// so the result records seed 0; component kinds follow the one-FV-component
/// convention.
pub fn read_smdp(file: &Path) -> Result<DrivingPath> {
    let mut inp = std::io::BufReader::new(std::fs::File::open(file)?);
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != SMDP_MAGIC {
        return Err(Error::Format(format!("bad SMDP magic {magic:?}")));
    }
    let mut u32buf = [0u8; 4];
    let mut u64buf = [0u8; 8];
    inp.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != SMDP_VERSION {
        return Err(Error::Format(format!("unsupported SMDP version {version}")));
    }
    inp.read_exact(&mut u64buf)?;
    let n_steps = u64::from_le_bytes(u64buf) as usize;
    inp.read_exact(&mut u32buf)?;
    let n_components = u32::from_le_bytes(u32buf) as usize;
    if n_steps == 0 || n_components == 0 {
        return Err(Error::Format("empty SMDP path".into()));
    }
    let mut values = Vec::with_capacity(n_components);
    for _ in 0..n_components {
        let mut component = Vec::with_capacity(n_steps + 1);
        for _ in 0..=n_steps {
            inp.read_exact(&mut u64buf)?;
            component.push(f64::from_le_bytes(u64buf));
        }
        values.push(component);
    }
    let grid = TimeGrid::new(values[0][0], values[0][n_steps], n_steps)
        .map_err(|e| Error::Format(format!("inconsistent SMDP time component: {e}")))?;
    let mut kinds = vec![ComponentKind::Martingale; n_components];
    kinds[0] = ComponentKind::FiniteVariation;
    Ok(DrivingPath { grid, values, kinds, seed: 0 })
}
