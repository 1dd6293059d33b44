//! The finite family of divergence-free vector fields `xi_k` that defines
//! the transport noise `sum_k xi_k(x) o dW^k`.
//!
//! Each mode is the perpendicular unit vector of a Fourier wavevector times
//! a power-law amplitude, so every mode is divergence-free by construction
//! and the truncation error is controlled by the amplitude decay. A uniform
//! (constant-in-space) mode is also available; it is the exactly solvable
//! case used by the translation-equivariance tests.

use crate::error::{Error, Result};
use crate::fields::{Grid2D, ScalarField, VectorField2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Cos,
    Sin,
}

/// Generator data for one noise mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeSpec {
    Fourier { kx: i64, ky: i64, phase: Phase, amplitude: f64 },
    Uniform { vx: f64, vy: f64 },
}

/// Cached gradient of one mode: entry `xy` is `d xi_x / d y` and so on.
#[derive(Debug, Clone)]
pub struct ModeGradient {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yx: ScalarField,
    pub yy: ScalarField,
}

/// Finite noise basis with precomputed fields, gradients and Laplacians.
#[derive(Debug, Clone)]
pub struct NoiseBasis {
    grid: Grid2D,
    specs: Vec<ModeSpec>,
    xi: Vec<VectorField2D>,
    grad: Vec<ModeGradient>,
    lap: Vec<VectorField2D>,
}

impl NoiseBasis {
    /// Basis with no modes (deterministic dynamics).
    pub fn empty(grid: Grid2D) -> Self {
        NoiseBasis { grid, specs: Vec::new(), xi: Vec::new(), grad: Vec::new(), lap: Vec::new() }
    }

    /// Single spatially uniform mode.
    pub fn uniform(grid: Grid2D, vx: f64, vy: f64) -> Self {
        Self::from_modes(grid, vec![ModeSpec::Uniform { vx, vy }]).unwrap()
    }

    pub fn from_modes(grid: Grid2D, specs: Vec<ModeSpec>) -> Result<Self> {
        let mut basis = NoiseBasis::empty(grid);
        for spec in specs {
            basis.push_mode(spec)?;
        }
        Ok(basis)
    }

    fn push_mode(&mut self, spec: ModeSpec) -> Result<()> {
        match spec {
            ModeSpec::Uniform { vx, vy } => {
                if !(vx.is_finite() && vy.is_finite()) {
                    return Err(Error::invalid("uniform mode must be finite"));
                }
                self.xi.push(VectorField2D {
                    x: ScalarField::constant(self.grid, vx),
                    y: ScalarField::constant(self.grid, vy),
                });
                self.grad.push(ModeGradient {
                    xx: ScalarField::zeros(self.grid),
                    xy: ScalarField::zeros(self.grid),
                    yx: ScalarField::zeros(self.grid),
                    yy: ScalarField::zeros(self.grid),
                });
                self.lap.push(VectorField2D::zeros(self.grid));
            }
            ModeSpec::Fourier { kx, ky, phase, amplitude } => {
                if kx == 0 && ky == 0 {
                    return Err(Error::invalid("Fourier noise mode requires k != 0"));
                }
                if !amplitude.is_finite() {
                    return Err(Error::invalid("noise amplitude must be finite"));
                }
                let norm = ((kx * kx + ky * ky) as f64).sqrt();
                let (ex, ey) = (-(ky as f64) / norm, kx as f64 / norm);
                let (kxf, kyf) = (kx as f64, ky as f64);
                let trig = move |theta: f64| match phase {
                    Phase::Cos => theta.cos(),
                    Phase::Sin => theta.sin(),
                };
                let dtrig = move |theta: f64| match phase {
                    Phase::Cos => -theta.sin(),
                    Phase::Sin => theta.cos(),
                };
                let field = |f: &dyn Fn(f64, f64) -> f64| {
                    ScalarField::from_fn(self.grid, |x, y| f(x, y))
                };
                self.xi.push(VectorField2D {
                    x: field(&|x, y| amplitude * ex * trig(kxf * x + kyf * y)),
                    y: field(&|x, y| amplitude * ey * trig(kxf * x + kyf * y)),
                });
                self.grad.push(ModeGradient {
                    xx: field(&|x, y| amplitude * ex * dtrig(kxf * x + kyf * y) * kxf),
                    xy: field(&|x, y| amplitude * ex * dtrig(kxf * x + kyf * y) * kyf),
                    yx: field(&|x, y| amplitude * ey * dtrig(kxf * x + kyf * y) * kxf),
                    yy: field(&|x, y| amplitude * ey * dtrig(kxf * x + kyf * y) * kyf),
                });
                let k2 = kxf * kxf + kyf * kyf;
                self.lap.push(VectorField2D {
                    x: field(&|x, y| -k2 * amplitude * ex * trig(kxf * x + kyf * y)),
                    y: field(&|x, y| -k2 * amplitude * ey * trig(kxf * x + kyf * y)),
                });
            }
        }
        self.specs.push(spec);
        Ok(())
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    /// Number of modes `K`; must match the martingale components of the
    /// driving path.
    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[ModeSpec] {
        &self.specs
    }

    pub fn xi(&self, k: usize) -> &VectorField2D {
        &self.xi[k]
    }

    pub fn gradient(&self, k: usize) -> &ModeGradient {
        &self.grad[k]
    }

    pub fn mode_laplacian(&self, k: usize) -> &VectorField2D {
        &self.lap[k]
    }

    /// Sup norm of the strongest mode, for CFL-style advisories.
    pub fn max_sup_norm(&self) -> f64 {
        self.specs
            .iter()
            .map(|s| match s {
                ModeSpec::Fourier { amplitude, .. } => amplitude.abs(),
                ModeSpec::Uniform { vx, vy } => (vx * vx + vy * vy).sqrt(),
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise noise velocity `sum_k xi_k(p) ds[k]`, evaluated from the
    /// closed-form modes (no interpolation error).
    pub fn eval_velocity_at(&self, p: [f64; 2], ds_mart: &[f64]) -> [f64; 2] {
        debug_assert_eq!(ds_mart.len(), self.len());
        let mut out = [0.0, 0.0];
        for (spec, &ds) in self.specs.iter().zip(ds_mart) {
            if ds == 0.0 {
                continue;
            }
            match spec {
                ModeSpec::Uniform { vx, vy } => {
                    out[0] += vx * ds;
                    out[1] += vy * ds;
                }
                ModeSpec::Fourier { kx, ky, phase, amplitude } => {
                    let theta = *kx as f64 * p[0] + *ky as f64 * p[1];
                    let t = match phase {
                        Phase::Cos => theta.cos(),
                        Phase::Sin => theta.sin(),
                    };
                    let norm = ((kx * kx + ky * ky) as f64).sqrt();
                    out[0] += amplitude * (-(*ky as f64) / norm) * t * ds;
                    out[1] += amplitude * (*kx as f64 / norm) * t * ds;
                }
            }
        }
        out
    }
}

/// Enumerate the standard curl-of-Fourier basis: wavevectors in the
/// half-plane `kx > 0 or (kx = 0, ky > 0)` with `0 < |k| <= kmax`, ordered
/// by `(|k|^2, ky, kx)`, each contributing a cosine then a sine mode with
/// amplitude `c |k|^-gamma`.
pub fn make_fourier_basis(
    grid: Grid2D,
    k_modes: usize,
    gamma: f64,
    c: f64,
    kmax: i64,
) -> Result<NoiseBasis> {
    if kmax < 1 {
        return Err(Error::invalid(format!("kmax must be >= 1 (got {kmax})")));
    }
    if !(gamma.is_finite() && c.is_finite()) {
        return Err(Error::invalid("gamma and c must be finite"));
    }
    let mut vectors = Vec::new();
    for kx in 0..=kmax {
        let ky_lo = if kx == 0 { 1 } else { -kmax };
        for ky in ky_lo..=kmax {
            let k2 = kx * kx + ky * ky;
            if k2 > 0 && k2 <= kmax * kmax {
                vectors.push((k2, ky, kx));
            }
        }
    }
    vectors.sort();
    let available = 2 * vectors.len();
    if k_modes > available {
        return Err(Error::invalid(format!(
            "requested {k_modes} modes but only {available} exist with |k| <= {kmax}"
        )));
    }
    let mut specs = Vec::with_capacity(k_modes);
    'outer: for (k2, ky, kx) in vectors {
        for phase in [Phase::Cos, Phase::Sin] {
            if specs.len() == k_modes {
                break 'outer;
            }
            let amplitude = c * (k2 as f64).sqrt().powf(-gamma);
            specs.push(ModeSpec::Fourier { kx, ky, phase, amplitude });
        }
    }
    NoiseBasis::from_modes(grid, specs)
}

/// Pointwise `sum_k xi_k ds[k]`; divergence-free as a sum of
/// divergence-free fields.
pub fn transport_increment(basis: &NoiseBasis, ds_mart: &[f64]) -> Result<VectorField2D> {
    if ds_mart.len() != basis.len() {
        return Err(Error::invalid(format!(
            "expected {} noise increments, got {}",
            basis.len(),
            ds_mart.len()
        )));
    }
    let mut out = VectorField2D::zeros(basis.grid());
    for (k, &ds) in ds_mart.iter().enumerate() {
        if ds != 0.0 {
            out.add_scaled(ds, basis.xi(k));
        }
    }
    Ok(out)
}
