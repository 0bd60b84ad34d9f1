use crate::potential::PotentialSpec;
use crate::twobody::PotentialSampling;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Green,
    Scatter,
    Twobody,
    Kernels,
    Energy,
    Thermo,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Green => "green",
            Stage::Scatter => "scatter",
            Stage::Twobody => "twobody",
            Stage::Kernels => "kernels",
            Stage::Energy => "energy",
            Stage::Thermo => "thermo",
        }
    }

    /// Stages whose output this one consumes.
    pub fn requires(self) -> &'static [Stage] {
        match self {
            Stage::Green | Stage::Scatter => &[],
            Stage::Twobody => &[Stage::Scatter],
            Stage::Kernels => &[Stage::Twobody],
            Stage::Energy => &[Stage::Scatter, Stage::Kernels],
            Stage::Thermo => &[Stage::Scatter],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default = "defaults::d")]
    pub d: usize,
    #[serde(default = "defaults::ell")]
    pub ell: f64,
    #[serde(default = "defaults::m")]
    pub m: usize,
    #[serde(default)]
    pub sampling: PotentialSampling,
    /// Grid per axis for the correlation kernels.
    #[serde(default = "defaults::coarse")]
    pub coarse: usize,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self { d: defaults::d(), ell: defaults::ell(), m: defaults::m(), sampling: PotentialSampling::default(), coarse: defaults::coarse() }
    }
}

/// One swept parameter: `ell`, `m` or `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "defaults::eigen")]
    pub eigen: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default = "defaults::steps")]
    pub scatter_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eigen: defaults::eigen(), max_iter: defaults::max_iter(), scatter_steps: defaults::steps() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Spectral,
    Position,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    #[serde(default = "defaults::n")]
    pub n: Vec<f64>,
    #[serde(default = "defaults::cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub route: Route,
}

impl Default for EnergySpec {
    fn default() -> Self {
        Self { n: defaults::n(), cutoff: defaults::cutoff(), route: Route::Both }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoSpec {
    #[serde(default = "defaults::rho")]
    pub rho: Vec<f64>,
    #[serde(default = "defaults::c_regime")]
    pub c: f64,
    /// Falls back to the fitted energy-window constant, then to 1.
    #[serde(rename = "C", default)]
    pub c_const: Option<f64>,
}

impl Default for ThermoSpec {
    fn default() -> Self {
        Self { rho: defaults::rho(), c: defaults::c_regime(), c_const: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenSpec {
    #[serde(default = "defaults::green_eps")]
    pub eps: f64,
    #[serde(default = "defaults::green_ell")]
    pub ell: f64,
    #[serde(default = "defaults::green_samples")]
    pub samples: usize,
    #[serde(default = "defaults::green_radius")]
    pub radius: usize,
}

impl Default for GreenSpec {
    fn default() -> Self {
        Self { eps: defaults::green_eps(), ell: defaults::green_ell(), samples: defaults::green_samples(), radius: defaults::green_radius() }
    }
}

/// A quantity whose log-log slope against the sweep variable is fitted,
/// named `stage.field`, e.g. `twobody.l2_deviation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Track {
    pub quantity: String,
    #[serde(default)]
    pub expected: Option<f64>,
    #[serde(default = "defaults::slope_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    #[serde(default)]
    pub track: Vec<Track>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub modules: Vec<Stage>,
    #[serde(default = "defaults::output")]
    pub output: String,
    /// Seed for randomly placed sample points.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub energy: EnergySpec,
    #[serde(default)]
    pub thermo: ThermoSpec,
    #[serde(default)]
    pub green: GreenSpec,
    #[serde(default)]
    pub study: StudySpec,
}

mod defaults {
    pub fn d() -> usize {
        3
    }
    pub fn ell() -> f64 {
        8.0
    }
    pub fn m() -> usize {
        8
    }
    pub fn coarse() -> usize {
        8
    }
    pub fn eigen() -> f64 {
        1e-8
    }
    pub fn max_iter() -> usize {
        500
    }
    pub fn steps() -> usize {
        crate::scattering::DEFAULT_STEPS
    }
    pub fn n() -> Vec<f64> {
        vec![2.0]
    }
    pub fn cutoff() -> usize {
        7
    }
    pub fn rho() -> Vec<f64> {
        (1..=8).map(|k| 10f64.powi(-k)).rev().collect()
    }
    pub fn c_regime() -> f64 {
        crate::thermo::DEFAULT_REGIME
    }
    pub fn green_eps() -> f64 {
        1e-2
    }
    pub fn green_ell() -> f64 {
        1.0
    }
    pub fn green_samples() -> usize {
        8
    }
    pub fn green_radius() -> usize {
        crate::green::DEFAULT_RADIUS
    }
    pub fn slope_tol() -> f64 {
        0.3
    }
    pub fn output() -> String {
        "out".into()
    }
}

pub const SWEEP_PARAMETERS: [&str; 3] = ["ell", "m", "kappa"];

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = self.modules.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("key `modules`: a stage is listed twice".into()));
        }
        if let Some(s) = &self.sweep {
            if !SWEEP_PARAMETERS.contains(&s.parameter.as_str()) {
                return Err(Error::Config(format!(
                    "key `sweep.parameter`: unknown parameter `{}` (expected one of {:?})",
                    s.parameter, SWEEP_PARAMETERS
                )));
            }
            if s.values.is_empty() {
                return Err(Error::Config("key `sweep.values`: empty".into()));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("key `sweep.values`: values must be finite".into()));
            }
            if s.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("key `sweep.values`: values must be strictly increasing".into()));
            }
            if s.parameter == "m" && s.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                return Err(Error::Config("key `sweep.values`: grid sizes must be positive integers".into()));
            }
        }
        if self.energy.n.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(Error::Config("key `energy.n`: particle numbers must be finite and nonnegative".into()));
        }
        if self.thermo.rho.windows(2).any(|w| w[1] <= w[0]) && !self.thermo.rho.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::Config("key `thermo.rho`: densities must be sorted".into()));
        }
        for t in &self.study.track {
            if !t.quantity.contains('.') {
                return Err(Error::Config(format!("key `study.track.quantity`: `{}` is not of the form stage.field", t.quantity)));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, so formatting and comments do not
    /// change the hash.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serializes");
        hex(&Sha256::digest(&bytes))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
