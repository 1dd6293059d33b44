//! Periodic pseudo-spectral toolbox on the 2-torus `[0, 2*pi)^2`.
//!
//! Real grid fields are stored x-major (`data[ix * ny + iy]`); spectral
//! coefficients use the usual DFT ordering with integer wavenumbers
//! `k in {-n/2+1, ..., n/2}`. All quadratic products in the solvers are
//! dealiased by the 2/3 rule; first derivatives zero the Nyquist mode so
//! that real fields stay real.

use crate::error::{Error, Result};
use crate::fft::fft2d;
use crate::rng::NormalStream;
use rustfft::num_complex::Complex64;
use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::path::Path;

/// Uniform periodic grid: `nx * ny` points on `[0, 2*pi)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::invalid(format!(
                "grid dimensions must be even and >= 8 (got {nx} x {ny})"
            )));
        }
        Ok(Grid2D { nx, ny })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_points(&self) -> usize {
        self.nx * self.ny
    }

    pub fn hx(&self) -> f64 {
        TAU / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        TAU / self.ny as f64
    }

    /// Physical coordinates of grid node `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> [f64; 2] {
        [ix as f64 * self.hx(), iy as f64 * self.hy()]
    }

    /// Integer wavenumber for index `m` along a dimension of size `n`.
    fn wavenumber(m: usize, n: usize) -> i64 {
        if m <= n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    pub fn kx(&self, m: usize) -> i64 {
        Self::wavenumber(m, self.nx)
    }

    pub fn ky(&self, l: usize) -> i64 {
        Self::wavenumber(l, self.ny)
    }
}

/// Differentiation axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Real scalar field on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2D,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField { grid, data: vec![0.0; grid.n_points()] }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        ScalarField { grid, data: vec![c; grid.n_points()] }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.n_points());
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                let [x, y] = grid.point(ix, iy);
                data.push(f(x, y));
            }
        }
        ScalarField { grid, data }
    }

    pub fn from_data(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.n_points() {
            return Err(Error::invalid("field data length does not match grid"));
        }
        Ok(ScalarField { grid, data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.data[ix * self.grid.ny() + iy]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Integral over the torus (trapezoidal = exact for trig polynomials).
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.hx() * self.grid.hy()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn rms(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    /// Continuum L2 norm `sqrt(integral(f^2))`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.hx() * self.grid.hy()).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        for v in &mut self.data {
            *v += c;
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        ScalarField { grid: self.grid, data }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ScalarField { grid: self.grid, data }
    }
}

/// Real 2D vector field; both components share the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        VectorField2D { x: ScalarField::zeros(grid), y: ScalarField::zeros(grid) }
    }

    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        if x.grid != y.grid {
            return Err(Error::invalid("vector field components must share a grid"));
        }
        Ok(VectorField2D { x, y })
    }

    pub fn grid(&self) -> Grid2D {
        self.x.grid
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn linf(&self) -> f64 {
        let mut m = 0.0_f64;
        for (a, b) in self.x.data().iter().zip(self.y.data()) {
            m = m.max((a * a + b * b).sqrt());
        }
        m
    }

    pub fn add_scaled(&mut self, c: f64, other: &VectorField2D) {
        self.x.add_scaled(c, &other.x);
        self.y.add_scaled(c, &other.y);
    }

    pub fn scale(&mut self, c: f64) {
        self.x.scale(c);
        self.y.scale(c);
    }
}

/// Complex Fourier coefficients of a real field (full DFT storage).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: Grid2D,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid2D) -> Self {
        Spectrum { grid, data: vec![Complex64::default(); grid.n_points()] }
    }

    pub fn from_field(f: &ScalarField) -> Self {
        let grid = f.grid;
        let mut data: Vec<Complex64> =
            f.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2d(&mut data, grid.nx(), grid.ny(), true);
        Spectrum { grid, data }
    }

    /// Inverse transform; taking the real part enforces the conjugate
    /// symmetry of real fields.
    pub fn to_field(&self) -> ScalarField {
        let mut work = self.data.clone();
        fft2d(&mut work, self.grid.nx(), self.grid.ny(), false);
        ScalarField { grid: self.grid, data: work.iter().map(|c| c.re).collect() }
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn add_scaled(&mut self, c: f64, other: &Spectrum) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn set_zero_mode(&mut self, v: Complex64) {
        self.data[0] = v;
    }

    /// Apply `(i k_axis)^order`; first derivatives zero the Nyquist mode.
    pub fn derivative(&self, axis: Axis, order: u32) -> Spectrum {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut out = self.clone();
        for m in 0..nx {
            let kx = Grid2D::wavenumber(m, nx);
            for l in 0..ny {
                let ky = Grid2D::wavenumber(l, ny);
                let (k, at_nyquist) = match axis {
                    Axis::X => (kx as f64, 2 * m == nx),
                    Axis::Y => (ky as f64, 2 * l == ny),
                };
                let c = &mut out.data[m * ny + l];
                *c = match order {
                    1 => {
                        if at_nyquist {
                            Complex64::default()
                        } else {
                            Complex64::new(0.0, k) * *c
                        }
                    }
                    2 => -k * k * *c,
                    _ => unreachable!("derivative order must be 1 or 2"),
                };
            }
        }
        out
    }

    pub fn dx(&self) -> Spectrum {
        self.derivative(Axis::X, 1)
    }

    pub fn dy(&self) -> Spectrum {
        self.derivative(Axis::Y, 1)
    }

    pub fn laplacian(&self) -> Spectrum {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut out = self.clone();
        for m in 0..nx {
            let kx = Grid2D::wavenumber(m, nx) as f64;
            for l in 0..ny {
                let ky = Grid2D::wavenumber(l, ny) as f64;
                out.data[m * ny + l] *= -(kx * kx + ky * ky);
            }
        }
        out
    }

    /// Spectral inverse Laplacian in the zero-mean gauge: divide by
    /// `-|k|^2`, set the zero mode to 0.
    pub fn inv_laplacian(&self) -> Spectrum {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut out = self.clone();
        for m in 0..nx {
            let kx = Grid2D::wavenumber(m, nx) as f64;
            for l in 0..ny {
                let ky = Grid2D::wavenumber(l, ny) as f64;
                let k2 = kx * kx + ky * ky;
                let c = &mut out.data[m * ny + l];
                *c = if k2 == 0.0 { Complex64::default() } else { *c / (-k2) };
            }
        }
        out
    }

    /// 2/3-rule dealiasing: zero every mode with `|kx| > nx/3` or
    /// `|ky| > ny/3`.
    pub fn dealias(&mut self) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let kx_max = (nx / 3) as i64;
        let ky_max = (ny / 3) as i64;
        for m in 0..nx {
            let kx = Grid2D::wavenumber(m, nx);
            for l in 0..ny {
                let ky = Grid2D::wavenumber(l, ny);
                if kx.abs() > kx_max || ky.abs() > ky_max {
                    self.data[m * ny + l] = Complex64::default();
                }
            }
        }
    }

    /// Trigonometric interpolation at arbitrary points (exact for
    /// band-limited fields). Cost is `O(nx * ny)` per point.
    pub fn interpolate(&self, points: &[[f64; 2]]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len());
        let mut wx = vec![Complex64::default(); self.grid.nx()];
        let mut wy = vec![Complex64::default(); self.grid.ny()];
        for p in points {
            make_phases(self.grid, *p, &mut wx, &mut wy)?;
            out.push(self.eval_phases(&wx, &wy));
        }
        Ok(out)
    }

    /// Evaluate with precomputed phase vectors from [`make_phases`].
    pub fn eval_phases(&self, wx: &[Complex64], wy: &[Complex64]) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut acc = Complex64::default();
        for m in 0..nx {
            let row = &self.data[m * ny..(m + 1) * ny];
            let mut s = Complex64::default();
            for (c, w) in row.iter().zip(wy) {
                s += c * w;
            }
            acc += s * wx[m];
        }
        acc.re / (nx * ny) as f64
    }
}

/// Phase vectors `exp(i k x)`, `exp(i k y)` for trigonometric interpolation
/// at a point; the Nyquist mode uses its cosine (real) form. Coordinates are
/// folded into `[0, 2*pi)`.
pub fn make_phases(
    grid: Grid2D,
    point: [f64; 2],
    wx: &mut [Complex64],
    wy: &mut [Complex64],
) -> Result<()> {
    let [x, y] = point;
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::invalid("interpolation point must be finite"));
    }
    let x = x.rem_euclid(TAU);
    let y = y.rem_euclid(TAU);
    fill_phases(x, grid.nx(), wx);
    fill_phases(y, grid.ny(), wy);
    Ok(())
}

fn fill_phases(coord: f64, n: usize, out: &mut [Complex64]) {
    for (m, slot) in out.iter_mut().enumerate().take(n) {
        let k = Grid2D::wavenumber(m, n) as f64;
        *slot = if 2 * m == n {
            Complex64::new((k * coord).cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, k * coord)
        };
    }
}

/// Spectral derivative of order 1 or 2 along an axis.
pub fn derivative(f: &ScalarField, axis: Axis, order: u32) -> Result<ScalarField> {
    if order == 0 || order > 2 {
        return Err(Error::invalid(format!("derivative order must be 1 or 2 (got {order})")));
    }
    Ok(Spectrum::from_field(f).derivative(axis, order).to_field())
}

pub fn gradient(f: &ScalarField) -> VectorField2D {
    let hat = Spectrum::from_field(f);
    VectorField2D { x: hat.dx().to_field(), y: hat.dy().to_field() }
}

pub fn divergence(v: &VectorField2D) -> ScalarField {
    let mut hat = Spectrum::from_field(&v.x).dx();
    hat.add_scaled(1.0, &Spectrum::from_field(&v.y).dy());
    hat.to_field()
}

/// 2D curl `dv/dx - du/dy`.
pub fn curl2d(v: &VectorField2D) -> ScalarField {
    let mut hat = Spectrum::from_field(&v.y).dx();
    hat.add_scaled(-1.0, &Spectrum::from_field(&v.x).dy());
    hat.to_field()
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    Spectrum::from_field(f).laplacian().to_field()
}

pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    Spectrum::from_field(f).inv_laplacian().to_field()
}

/// Project the spectral pair `(u, v)` onto its divergence-free part,
/// in place: `u_hat -= k (k . u_hat) / |k|^2`.
pub fn leray_project_spectral(u: &mut Spectrum, v: &mut Spectrum) {
    let (nx, ny) = (u.grid.nx(), u.grid.ny());
    debug_assert_eq!(u.grid, v.grid);
    for m in 0..nx {
        let kx = Grid2D::wavenumber(m, nx) as f64;
        for l in 0..ny {
            let ky = Grid2D::wavenumber(l, ny) as f64;
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let idx = m * ny + l;
            let d = (kx * u.data[idx] + ky * v.data[idx]) / k2;
            u.data[idx] -= kx * d;
            v.data[idx] -= ky * d;
        }
    }
}

/// Leray projection `v - grad(inv_laplacian(div v))`; idempotent, output
/// divergence at machine precision.
pub fn leray_project(v: &VectorField2D) -> VectorField2D {
    let mut uh = Spectrum::from_field(&v.x);
    let mut vh = Spectrum::from_field(&v.y);
    leray_project_spectral(&mut uh, &mut vh);
    VectorField2D { x: uh.to_field(), y: vh.to_field() }
}

/// 2/3-rule dealiased copy of a real field.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut hat = Spectrum::from_field(f);
    hat.dealias();
    hat.to_field()
}

/// Trigonometric interpolation of a real field at arbitrary points.
pub fn interpolate(f: &ScalarField, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    Spectrum::from_field(f).interpolate(points)
}

/// Periodic translation `f(x - s)` by spectral phase shift; exact for
/// band-limited fields (Nyquist modes use the symmetric cosine factor).
pub fn shift(f: &ScalarField, s: [f64; 2]) -> ScalarField {
    let grid = f.grid;
    let mut hat = Spectrum::from_field(f);
    for m in 0..grid.nx() {
        let kx = Grid2D::wavenumber(m, grid.nx()) as f64;
        for l in 0..grid.ny() {
            let ky = Grid2D::wavenumber(l, grid.ny()) as f64;
            let theta = kx * s[0] + ky * s[1];
            let factor = if 2 * m == grid.nx() || 2 * l == grid.ny() {
                Complex64::new(theta.cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -theta)
            };
            hat.data[m * grid.ny() + l] *= factor;
        }
    }
    hat.to_field()
}

/// Deterministic random field band-limited to `|kx|,|ky| <= kmax`,
/// normalized to the requested rms. Coefficients are a pure function of
/// `(seed, mode)`.
pub fn random_band_limited(grid: Grid2D, kmax: i64, rms: f64, seed: u64) -> ScalarField {
    let mut draws = NormalStream::new(seed, 0x4649_454c_44, 0);
    let mut f = ScalarField::zeros(grid);
    let kmax = kmax.max(1);
    for kx in 0..=kmax {
        let ky_lo = if kx == 0 { 1 } else { -kmax };
        for ky in ky_lo..=kmax {
            let a = draws.next_normal();
            let b = draws.next_normal();
            let (kxf, kyf) = (kx as f64, ky as f64);
            for ix in 0..grid.nx() {
                for iy in 0..grid.ny() {
                    let [x, y] = grid.point(ix, iy);
                    let phase = kxf * x + kyf * y;
                    f.data[ix * grid.ny() + iy] += a * phase.cos() + b * phase.sin();
                }
            }
        }
    }
    let current = f.rms();
    if current > 0.0 {
        f.scale(rms / current);
    }
    f
}

/// Deterministic divergence-free random velocity: the perpendicular
/// gradient of a random band-limited streamfunction, scaled to `max |u|`.
pub fn random_divergence_free(grid: Grid2D, kmax: i64, umax: f64, seed: u64) -> VectorField2D {
    let psi = random_band_limited(grid, kmax, 1.0, seed);
    let hat = Spectrum::from_field(&psi);
    let mut u = VectorField2D {
        x: {
            let mut d = hat.dy().to_field();
            d.scale(-1.0);
            d
        },
        y: hat.dx().to_field(),
    };
    let m = u.linf();
    if m > 0.0 {
        u.scale(umax / m);
    }
    u
}

const SFLD_MAGIC: &[u8; 4] = b"SFLD";
const SFLD_VERSION: u32 = 1;

/// Write a field snapshot in the little-endian "SFLD" format.
pub fn write_sfld(file: &Path, time: f64, fields: &[&ScalarField]) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::invalid("snapshot needs at least one field"));
    }
    let grid = fields[0].grid;
    if fields.iter().any(|f| f.grid != grid) {
        return Err(Error::invalid("snapshot fields must share a grid"));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(file)?);
    out.write_all(SFLD_MAGIC)?;
    out.write_all(&SFLD_VERSION.to_le_bytes())?;
    out.write_all(&(grid.nx() as u32).to_le_bytes())?;
    out.write_all(&(grid.ny() as u32).to_le_bytes())?;
    out.write_all(&(fields.len() as u32).to_le_bytes())?;
    out.write_all(&time.to_le_bytes())?;
    for f in fields {
        for v in f.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read a snapshot written by [`write_sfld`]; returns the time stamp and
/// the fields.
pub fn read_sfld(file: &Path) -> Result<(f64, Vec<ScalarField>)> {
    let mut inp = std::io::BufReader::new(std::fs::File::open(file)?);
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != SFLD_MAGIC {
        return Err(Error::Format(format!("bad SFLD magic {magic:?}")));
    }
    let mut u32buf = [0u8; 4];
    let mut f64buf = [0u8; 8];
    inp.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != SFLD_VERSION {
        return Err(Error::Format(format!("unsupported SFLD version {version}")));
    }
    inp.read_exact(&mut u32buf)?;
    let nx = u32::from_le_bytes(u32buf) as usize;
    inp.read_exact(&mut u32buf)?;
    let ny = u32::from_le_bytes(u32buf) as usize;
    inp.read_exact(&mut u32buf)?;
    let n_fields = u32::from_le_bytes(u32buf) as usize;
    inp.read_exact(&mut f64buf)?;
    let time = f64::from_le_bytes(f64buf);
    let grid = Grid2D::new(nx, ny).map_err(|e| Error::Format(format!("bad SFLD grid: {e}")))?;
    let mut fields = Vec::with_capacity(n_fields);
    for _ in 0..n_fields {
        let mut data = Vec::with_capacity(grid.n_points());
        for _ in 0..grid.n_points() {
            inp.read_exact(&mut f64buf)?;
            data.push(f64::from_le_bytes(f64buf));
        }
        fields.push(ScalarField { grid, data });
    }
    Ok((time, fields))
}
