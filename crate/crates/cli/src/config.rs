//! Run configuration: a sectioned key = value (TOML) file.
//!
//! Required keys: `mode`, `nx`, `ny`, `dt`, `t_end`. Everything else has a
//! documented default (see the README grammar table). Unknown keys are
//! rejected with the offending key named.

use saltlab::fields::Grid2D;
use saltlab::noise_basis::{self, ModeSpec, NoiseBasis, Phase};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    EulerVorticity,
    EulerVelocity,
    Rsw,
    AdvectionTest,
    SdeConvergence,
    LemmaCheck,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::EulerVorticity => "euler-vorticity",
            Mode::EulerVelocity => "euler-velocity",
            Mode::Rsw => "rsw",
            Mode::AdvectionTest => "advection-test",
            Mode::SdeConvergence => "sde-convergence",
            Mode::LemmaCheck => "lemma-check",
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Number of noise modes K (martingale components of the driving path).
    pub k: usize,
    /// Power-law decay exponent of the mode amplitudes.
    pub gamma: f64,
    /// Amplitude scale.
    pub c: f64,
    /// Wavenumber cutoff of the Fourier basis.
    pub kmax: i64,
    /// Optional single uniform mode `[vx, vy]` replacing the Fourier basis.
    pub uniform: Option<[f64; 2]>,
    /// Optional explicit mode list replacing the generated basis.
    pub modes: Option<Vec<ModeConfig>>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { k: 4, gamma: 2.0, c: 0.1, kmax: 4, uniform: None, modes: None }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub kx: i64,
    pub ky: i64,
    /// "cos" or "sin"
    pub phase: String,
    pub amplitude: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// "brownian" or "ou"
    pub kind: String,
    pub theta: f64,
    pub sigma: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { kind: "brownian".to_string(), theta: 1.0, sigma: 1.0 }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IcConfig {
    /// "taylor-green" or "random"
    pub kind: String,
    /// Band limit of random initial data.
    pub kmax: i64,
    /// Amplitude of random initial data (max |u| or vorticity rms).
    pub amplitude: f64,
}

impl Default for IcConfig {
    fn default() -> Self {
        IcConfig { kind: "taylor-green".to_string(), kmax: 4, amplitude: 1.0 }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RswConfig {
    pub epsilon: f64,
    pub froude: f64,
    /// Constant part of the Coriolis parameter.
    pub f0: f64,
    /// Amplitude of a `cos(y)` modulation of the Coriolis parameter.
    pub f_wave: f64,
    /// Amplitude of a `cos(x) cos(y)` bottom topography.
    pub b_amp: f64,
    /// Mean resting depth.
    pub depth: f64,
}

impl Default for RswConfig {
    fn default() -> Self {
        RswConfig { epsilon: 0.1, froude: 1.0, f0: 1.0, f_wave: 0.0, b_amp: 0.0, depth: 1.0 }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AdvectionConfig {
    pub particles: usize,
}

impl Default for AdvectionConfig {
    fn default() -> Self {
        AdvectionConfig { particles: 100 }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SdeConfig {
    /// "gbm-stratonovich" (dX = X o dW) or "linear-ode" (dX = lambda X dt).
    pub kind: String,
    pub lambda: f64,
    pub x0: f64,
    /// Monte-Carlo paths per refinement level.
    pub paths: usize,
    /// Refinement levels for the built-in convergence report.
    pub levels: usize,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            kind: "gbm-stratonovich".to_string(),
            lambda: -1.0,
            x0: 1.0,
            paths: 32,
            levels: 6,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub a: f64,
    pub b: f64,
    pub n_smooth: usize,
    pub seeds: usize,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { a: 0.25, b: 0.75, n_smooth: 8, seeds: 100 }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_members")]
    pub members: usize,
    #[serde(default)]
    pub out_dir: Option<String>,
    /// Steps between SFLD field snapshots; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub path: PathConfig,
    #[serde(default)]
    pub ic: IcConfig,
    #[serde(default)]
    pub rsw: RswConfig,
    #[serde(default)]
    pub advection: AdvectionConfig,
    #[serde(default)]
    pub sde: SdeConfig,
    #[serde(default)]
    pub lemma: LemmaConfig,
}

fn default_seed() -> u64 {
    0
}

fn default_members() -> usize {
    1
}

/// Parse and validate a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Canonical serialization; `parse_config(serialize_config(c)) == c`.
pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("config serializes")
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, why: String| Err(ConfigError::Invalid(format!("{key}: {why}")));
        if self.nx < 8 || self.ny < 8 || self.nx % 2 != 0 || self.ny % 2 != 0 {
            return bad("nx/ny", format!("grid must be even and >= 8 (got {}x{})", self.nx, self.ny));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", format!("must be > 0 (got {})", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end", format!("must be > 0 (got {})", self.t_end));
        }
        if self.t_end < self.dt {
            return bad("t_end", format!("must be >= dt (got {} < {})", self.t_end, self.dt));
        }
        if self.members == 0 {
            return bad("members", "must be >= 1".to_string());
        }
        if self.noise.kmax < 1 {
            return bad("noise.kmax", format!("must be >= 1 (got {})", self.noise.kmax));
        }
        if !(self.noise.c.is_finite() && self.noise.gamma.is_finite()) {
            return bad("noise.c/noise.gamma", "must be finite".to_string());
        }
        match self.path.kind.as_str() {
            "brownian" | "ou" => {}
            other => return bad("path.kind", format!("unknown path kind {other:?}")),
        }
        if self.path.theta < 0.0 {
            return bad("path.theta", format!("must be >= 0 (got {})", self.path.theta));
        }
        if self.path.sigma < 0.0 {
            return bad("path.sigma", format!("must be >= 0 (got {})", self.path.sigma));
        }
        match self.ic.kind.as_str() {
            "taylor-green" | "random" => {}
            other => return bad("ic.kind", format!("unknown initial condition {other:?}")),
        }
        if self.rsw.epsilon <= 0.0 {
            return bad("rsw.epsilon", format!("must be > 0 (got {})", self.rsw.epsilon));
        }
        if self.rsw.froude <= 0.0 {
            return bad("rsw.froude", format!("must be > 0 (got {})", self.rsw.froude));
        }
        if self.rsw.depth <= 0.0 {
            return bad("rsw.depth", format!("must be > 0 (got {})", self.rsw.depth));
        }
        if self.advection.particles == 0 || self.advection.particles > 100_000 {
            return bad("advection.particles", "must be in 1..=100000".to_string());
        }
        match self.sde.kind.as_str() {
            "gbm-stratonovich" | "linear-ode" => {}
            other => return bad("sde.kind", format!("unknown sde kind {other:?}")),
        }
        if self.sde.paths == 0 || self.sde.levels == 0 {
            return bad("sde.paths/sde.levels", "must be >= 1".to_string());
        }
        if !(self.lemma.a.is_finite() && self.lemma.b.is_finite() && self.lemma.a < self.lemma.b)
        {
            return bad("lemma.a/lemma.b", "need a < b".to_string());
        }
        if self.lemma.n_smooth == 0 || self.lemma.seeds == 0 {
            return bad("lemma.n_smooth/lemma.seeds", "must be >= 1".to_string());
        }
        if let Some(modes) = &self.noise.modes {
            for (i, m) in modes.iter().enumerate() {
                if m.phase != "cos" && m.phase != "sin" {
                    return bad(
                        &format!("noise.modes[{i}].phase"),
                        format!("must be \"cos\" or \"sin\" (got {:?})", m.phase),
                    );
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D, ConfigError> {
        Grid2D::new(self.nx, self.ny).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    /// Materialize the noise basis described by the `[noise]` section.
    pub fn build_basis(&self, grid: Grid2D) -> Result<NoiseBasis, ConfigError> {
        let wrap = |e: saltlab::Error| ConfigError::Invalid(format!("noise: {e}"));
        if let Some([vx, vy]) = self.noise.uniform {
            return Ok(NoiseBasis::uniform(grid, vx, vy));
        }
        if let Some(modes) = &self.noise.modes {
            let specs = modes
                .iter()
                .map(|m| ModeSpec::Fourier {
                    kx: m.kx,
                    ky: m.ky,
                    phase: if m.phase == "cos" { Phase::Cos } else { Phase::Sin },
                    amplitude: m.amplitude,
                })
                .collect();
            return NoiseBasis::from_modes(grid, specs).map_err(wrap);
        }
        if self.noise.k == 0 {
            return Ok(NoiseBasis::empty(grid));
        }
        noise_basis::make_fourier_basis(grid, self.noise.k, self.noise.gamma, self.noise.c, self.noise.kmax)
            .map_err(wrap)
    }

    /// Number of martingale components the driving path needs.
    pub fn n_channels(&self) -> usize {
        if self.noise.uniform.is_some() {
            1
        } else if let Some(modes) = &self.noise.modes {
            modes.len()
        } else {
            self.noise.k
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mode = \"euler-vorticity\"\nnx = 64\nny = 64\ndt = 1e-3\nt_end = 1.0\n";

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.members, 1);
        assert_eq!(c.noise.k, 4);
        assert_eq!(c.noise.gamma, 2.0);
        assert_eq!(c.noise.c, 0.1);
        assert_eq!(c.noise.kmax, 4);
        assert_eq!(c.path.kind, "brownian");
        assert_eq!(c.ic.kind, "taylor-green");
        assert_eq!(c.rsw.epsilon, 0.1);
        assert_eq!(c.advection.particles, 100);
        assert_eq!(c.snapshot_every, 0);
    }

    #[test]
    fn negative_dt_is_rejected_naming_the_key() {
        let text = MINIMAL.replace("dt = 1e-3", "dt = -1.0");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("dt"), "error was: {err}");
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let text = format!("{MINIMAL}wibble = 3\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("wibble"), "error was: {err}");
    }

    #[test]
    fn unknown_mode_is_rejected() {
        let text = MINIMAL.replace("euler-vorticity", "euler-backwards");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn round_trip_is_stable() {
        let text = format!(
            "{MINIMAL}seed = 42\nmembers = 3\n[noise]\nk = 2\ngamma = 1.5\nc = 0.05\nkmax = 3\n\
             [rsw]\nepsilon = 0.2\nfroude = 2.0\nf0 = 1.0\nf_wave = 0.1\nb_amp = 0.0\ndepth = 1.5\n"
        );
        let c = parse_config(&text).unwrap();
        let round = parse_config(&serialize_config(&c)).unwrap();
        assert_eq!(c, round);
    }

    #[test]
    fn explicit_mode_list_builds_a_basis() {
        let text = format!(
            "{MINIMAL}[noise]\nk = 0\ngamma = 2.0\nc = 0.1\nkmax = 4\n\
             modes = [{{ kx = 1, ky = 0, phase = \"cos\", amplitude = 0.05 }}]\n"
        );
        let c = parse_config(&text).unwrap();
        let basis = c.build_basis(c.grid().unwrap()).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(c.n_channels(), 1);
    }

    #[test]
    fn bad_phase_names_the_key_path() {
        let text = format!(
            "{MINIMAL}[noise]\nk = 0\ngamma = 2.0\nc = 0.1\nkmax = 4\n\
             modes = [{{ kx = 1, ky = 0, phase = \"tan\", amplitude = 0.05 }}]\n"
        );
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("noise.modes[0].phase"), "error was: {err}");
    }

    #[test]
    fn uniform_mode_maps_to_one_channel() {
        let text = format!("{MINIMAL}[noise]\nk = 4\ngamma = 2.0\nc = 0.1\nkmax = 4\nuniform = [0.1, 0.05]\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.n_channels(), 1);
        let basis = c.build_basis(c.grid().unwrap()).unwrap();
        assert_eq!(basis.len(), 1);
    }
}
