//! Admissible pair interactions: bounded, nonnegative, radial, compactly
//! supported, together with the coupling constant.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Radial profile of the interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// `V0` on the closed ball of radius `R0`.
    SoftSphere,
    /// `V0 (1 - r²/R0²)²` inside the ball.
    TruncatedPolynomial,
    /// Linear interpolation between `(radius, value)` samples; zero past the
    /// last radius.
    Tabulated(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    shape: Shape,
    v0: f64,
    r0: f64,
    kappa: f64,
}

/// Integral norms of a potential (the coupling is not included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralNorms {
    /// ∫ V(x) dx over R³
    pub l1: f64,
    /// ∫ V(x)/|x| dx over R³
    pub l1_over_r: f64,
    /// sup V
    pub linf: f64,
}

impl Potential {
    pub fn soft_sphere(v0: f64, r0: f64, kappa: f64) -> Result<Self> {
        Self::new(Shape::SoftSphere, v0, r0, kappa)
    }

    pub fn truncated_polynomial(v0: f64, r0: f64, kappa: f64) -> Result<Self> {
        Self::new(Shape::TruncatedPolynomial, v0, r0, kappa)
    }

    /// Tabulated profile. `V0` and `R0` are taken from the table (maximum value
    /// and last radius).
    pub fn tabulated(samples: Vec<(f64, f64)>, kappa: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Config("tabulated potential needs at least two samples".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Config(format!(
                    "tabulated radii must be strictly increasing (got {} after {})",
                    w[1].0, w[0].0
                )));
            }
        }
        if samples[0].0 < 0.0 {
            return Err(Error::Config("tabulated radii must be nonnegative".into()));
        }
        if let Some(bad) = samples.iter().find(|s| !(s.1 >= 0.0) || !s.1.is_finite()) {
            return Err(Error::Config(format!("tabulated value {} is not a finite nonnegative number", bad.1)));
        }
        let v0 = samples.iter().map(|s| s.1).fold(0.0, f64::max);
        let r0 = samples.last().unwrap().0;
        Self::new(Shape::Tabulated(samples), v0, r0, kappa)
    }

    /// Reads a `radius,value` CSV file (an optional non-numeric header line is skipped).
    pub fn tabulated_from_csv(path: &Path, kappa: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
                return Err(Error::Config(format!("{}:{}: expected `radius,value`", path.display(), lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(r), Ok(v)) => samples.push((r, v)),
                _ if samples.is_empty() => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "{}:{}: cannot parse `{line}`",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Self::tabulated(samples, kappa)
    }

    fn new(shape: Shape, v0: f64, r0: f64, kappa: f64) -> Result<Self> {
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(Error::Config(format!("V0 must be finite and nonnegative, got {v0}")));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::Config(format!("R0 must be finite and positive, got {r0}")));
        }
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be finite and nonnegative, got {kappa}")));
        }
        Ok(Self { shape, v0, r0, kappa })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }
    pub fn v0(&self) -> f64 {
        self.v0
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.shape.clone(), self.v0, self.r0, kappa)
    }

    /// V(r), without the coupling. Exactly zero for `r > R0`.
    pub fn evaluate(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r > self.r0 {
            return 0.0;
        }
        self.branch(self.piece_index(r), r)
    }

    /// κ V(r)
    pub fn coupled(&self, r: f64) -> f64 {
        self.kappa * self.evaluate(r)
    }

    /// Radii in `(0, R0]` where the profile is not smooth, sorted. `R0` is
    /// always the last entry.
    pub fn knots(&self) -> Vec<f64> {
        match &self.shape {
            Shape::SoftSphere | Shape::TruncatedPolynomial => vec![self.r0],
            Shape::Tabulated(t) => t.iter().map(|s| s.0).filter(|&r| r > 0.0).collect(),
        }
    }

    /// Evaluates the smooth branch that is valid on the interval `[lo, hi]`
    /// between two consecutive knots, continued to the interval ends. This
    /// gives one-sided values at jump discontinuities.
    pub fn evaluate_on_piece(&self, r: f64, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        if mid > self.r0 {
            return 0.0;
        }
        self.branch(self.piece_index(mid), r)
    }

    fn piece_index(&self, r: f64) -> usize {
        match &self.shape {
            Shape::Tabulated(t) => t.partition_point(|s| s.0 <= r).min(t.len() - 1),
            _ => 0,
        }
    }

    fn branch(&self, piece: usize, r: f64) -> f64 {
        match &self.shape {
            Shape::SoftSphere => self.v0,
            Shape::TruncatedPolynomial => {
                let s = 1.0 - (r / self.r0).powi(2);
                self.v0 * s * s
            }
            Shape::Tabulated(t) => {
                if piece == 0 {
                    // before the first sample the profile is flat
                    return t[0].1;
                }
                let (r1, v1) = t[piece - 1];
                let (r2, v2) = t[piece];
                v1 + (v2 - v1) * (r - r1) / (r2 - r1)
            }
        }
    }

    /// The potential `ℓ² V(ℓ r)` with the same coupling, so that
    /// `rescaled(ℓ).coupled(r) = κ ℓ² V(ℓ r)`.
    pub fn rescaled(&self, ell: f64) -> Result<Self> {
        let shape = match &self.shape {
            Shape::Tabulated(t) => Shape::Tabulated(t.iter().map(|&(r, v)| (r / ell, v * ell * ell)).collect()),
            s => s.clone(),
        };
        Self::new(shape, self.v0 * ell * ell, self.r0 / ell, self.kappa)
    }

    /// Integrates `g(r) V(r)` over `[0, R0]` piece by piece.
    pub fn radial_integral<F: Fn(f64) -> f64>(&self, g: F, abs_tol: f64) -> f64 {
        let mut lo = 0.0;
        let mut total = 0.0;
        for hi in self.knots() {
            let (v, _) = quad::integrate(|r| g(r) * self.evaluate_on_piece(r, lo, hi), lo, hi, abs_tol);
            total += v;
            lo = hi;
        }
        total
    }

    /// Three-dimensional norms by adaptive radial quadrature with measure 4πr²dr.
    pub fn integral_norms(&self) -> IntegralNorms {
        use std::f64::consts::PI;
        let l1 = self.radial_integral(|r| 4.0 * PI * r * r, 1e-12);
        let l1_over_r = self.radial_integral(|r| 4.0 * PI * r, 1e-12);
        let linf = match &self.shape {
            Shape::Tabulated(t) => t.iter().map(|s| s.1).fold(0.0, f64::max),
            _ => self.v0,
        };
        IntegralNorms { l1, l1_over_r, linf }
    }
}

/// Serializable description used in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: String,
    #[serde(rename = "V0", default = "one")]
    pub v0: f64,
    #[serde(rename = "R0", default = "one")]
    pub r0: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default)]
    pub table: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { kind: "soft-sphere".into(), v0: 1.0, r0: 1.0, kappa: 1.0, table: None }
    }
}

impl PotentialSpec {
    /// Builds the potential; relative table paths resolve against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<Potential> {
        match self.kind.as_str() {
            "soft-sphere" => Potential::soft_sphere(self.v0, self.r0, self.kappa),
            "truncated-polynomial" => Potential::truncated_polynomial(self.v0, self.r0, self.kappa),
            "tabulated-radial" => {
                let Some(table) = &self.table else {
                    return Err(Error::Config("potential.table is required for kind `tabulated-radial`".into()));
                };
                let path = match base {
                    Some(b) if Path::new(table).is_relative() => b.join(table),
                    _ => Path::new(table).to_path_buf(),
                };
                Potential::tabulated_from_csv(&path, self.kappa)
            }
            other => Err(Error::Config(format!(
                "potential.kind: unknown kind `{other}` (expected soft-sphere, truncated-polynomial or tabulated-radial)"
            ))),
        }
    }
}
